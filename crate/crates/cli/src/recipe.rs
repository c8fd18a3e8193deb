use std::path::{Path, PathBuf};

use kext_core::werner::ellipse_boundary;
use serde::Deserialize;

use crate::config::{PartialConfig, SweepConfig};
use crate::error::CliError;
use crate::sweep::{self, OutputGuard, SweepRow};

pub const BUILTIN: &[(&str, &str)] = &[
    ("copies-k1", include_str!("../recipes/copies-k1.toml")),
    ("tradeoff-ellipse", include_str!("../recipes/tradeoff-ellipse.toml")),
    (
        "single-copy-k-sweep-d3",
        include_str!("../recipes/single-copy-k-sweep-d3.toml"),
    ),
    ("two-copies-d3", include_str!("../recipes/two-copies-d3.toml")),
    (
        "copies-extensions-d3",
        include_str!("../recipes/copies-extensions-d3.toml"),
    ),
];

pub const NOT_REPRODUCED: &str = "not reproduced: exceeds the solver budget and no symmetry reduction is available";

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RecipeKind {
    #[default]
    Sweep,
    Ellipse,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Recipe {
    pub description: String,
    #[serde(default)]
    pub notes: Vec<String>,
    #[serde(default)]
    pub kind: RecipeKind,
    /// Boundary sample count for ellipse recipes.
    pub points: Option<usize>,
    #[serde(default)]
    pub defaults: PartialConfig,
    #[serde(default)]
    pub series: Vec<Series>,
}

#[derive(Clone, Debug, Deserialize)]
pub struct Series {
    pub name: String,
    #[serde(flatten)]
    pub config: PartialConfig,
}

impl Recipe {
    pub fn parse(text: &str) -> Result<Recipe, CliError> {
        let r: Recipe = toml::from_str(text).map_err(|e| CliError::usage(format!("recipe: {}", e.message())))?;
        match r.kind {
            RecipeKind::Sweep if r.series.is_empty() => Err(CliError::usage("recipe has no series")),
            RecipeKind::Ellipse if r.points.unwrap_or(0) < 3 => {
                Err(CliError::usage("ellipse recipe needs points >= 3"))
            }
            _ => Ok(r),
        }
    }

    /// Validated configuration of one series, with `overrides` on top.
    pub fn series_config(&self, series: &Series, overrides: &PartialConfig) -> Result<SweepConfig, CliError> {
        let c = self
            .defaults
            .clone()
            .overlay(series.config.clone())
            .overlay(overrides.clone());
        SweepConfig::try_from(c).map_err(|e| CliError::usage(format!("series `{}`: {e}", series.name)))
    }
}

/// A builtin by name, or a recipe file by path. Paths inside the recipe
/// resolve against the file's directory.
pub fn load_recipe(name: &str) -> Result<(String, Recipe), CliError> {
    if let Some((n, text)) = BUILTIN.iter().find(|(n, _)| *n == name) {
        return Ok((n.to_string(), Recipe::parse(text)?));
    }
    let path = Path::new(name);
    if path.is_file() {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let mut r = Recipe::parse(&text)?;
        let dir = path.parent().unwrap_or(Path::new("."));
        r.defaults = r.defaults.rebase(dir);
        for s in &mut r.series {
            s.config = s.config.clone().rebase(dir);
        }
        let stem = path
            .file_stem()
            .map_or("recipe".into(), |s| s.to_string_lossy().into_owned());
        return Ok((stem, r));
    }
    let known: Vec<_> = BUILTIN.iter().map(|(n, _)| *n).collect();
    Err(CliError::usage(format!(
        "unknown recipe `{name}` (known: {})",
        known.join(", ")
    )))
}

pub fn ellipse_csv(points: usize) -> String {
    let mut out = String::from("# kext-ellipse v1\ntheta,f1,f2\n");
    for (i, t) in ellipse_boundary(points).iter().enumerate() {
        let theta = 2.0 * std::f64::consts::PI * i as f64 / points as f64;
        out += &format!("{theta:.10},{:.10},{:.10}\n", t.f1, t.f2);
    }
    out
}

#[derive(Debug)]
pub enum SeriesOutcome {
    Rows(Vec<SweepRow>),
    NotReproduced(String),
    Ellipse(usize),
}

#[derive(Debug)]
pub struct SeriesReport {
    pub name: String,
    pub path: PathBuf,
    pub outcome: SeriesOutcome,
}

/// Options of [`run_recipe`].
#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub out_dir: PathBuf,
    /// Restricts the run to these series; empty runs all.
    pub only: Vec<String>,
    pub overrides: PartialConfig,
    pub parallelism: Option<usize>,
}

/// Runs a recipe into `out_dir`, one CSV per series named
/// `<recipe>_<series>.csv`. Series over the solver budget get a CSV with a
/// comment line instead of rows. Everything written is removed on failure.
pub fn run_recipe(name: &str, recipe: &Recipe, opts: &RunOptions) -> Result<Vec<SeriesReport>, CliError> {
    let mut guard = OutputGuard::default();
    let mut reports = Vec::new();
    if recipe.kind == RecipeKind::Ellipse {
        let points = recipe.points.expect("validated");
        let path = opts.out_dir.join(format!("{name}.csv"));
        guard.create(&path, &ellipse_csv(points))?;
        guard.commit();
        return Ok(vec![SeriesReport {
            name: name.into(),
            path,
            outcome: SeriesOutcome::Ellipse(points),
        }]);
    }
    for wanted in &opts.only {
        if !recipe.series.iter().any(|s| &s.name == wanted) {
            return Err(CliError::usage(format!("recipe `{name}` has no series `{wanted}`")));
        }
    }
    let selected: Vec<&Series> = recipe
        .series
        .iter()
        .filter(|s| opts.only.is_empty() || opts.only.contains(&s.name))
        .collect();
    let configs = selected
        .iter()
        .map(|s| recipe.series_config(s, &opts.overrides))
        .collect::<Result<Vec<_>, _>>()?;
    let pool = sweep::thread_pool(sweep::thread_count(opts.parallelism.or(recipe.defaults.parallelism))?)?;
    for (series, cfg) in selected.iter().zip(&configs) {
        let path = opts.out_dir.join(format!("{name}_{}.csv", series.name));
        guard.create(&path, &sweep::csv_preamble())?;
        let outcome = match sweep::check_budget(cfg) {
            Err(CliError::Solver(e @ kext_core::Error::BudgetExceeded { .. })) => {
                log::info!("series {}: {e}", series.name);
                guard.append(&path, &format!("# {NOT_REPRODUCED} ({e})\n"))?;
                SeriesOutcome::NotReproduced(e.to_string())
            }
            Err(e) => return Err(e),
            Ok(()) => {
                log::info!("series {}: {} points", series.name, cfg.steps);
                let rows = sweep::run_sweep(cfg, &pool)?;
                let body: String = rows.iter().map(|r| sweep::format_row(r) + "\n").collect();
                guard.append(&path, &body)?;
                SeriesOutcome::Rows(rows)
            }
        };
        reports.push(SeriesReport {
            name: series.name.clone(),
            path,
            outcome,
        });
    }
    guard.commit();
    Ok(reports)
}
