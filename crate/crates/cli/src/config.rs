use std::path::{Path, PathBuf};

use kext_core::io::load_state_with;
use kext_core::linalg::{HermitianOperator, SystemLayout};
use kext_core::solver::{Backend, KExtProblem, Side};
use kext_core::states::{werner, BellKind, DensityOperator, WernerParams};
use serde::Deserialize;

use crate::error::{invalid_input, CliError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Werner,
    File,
}

/// Swept coordinate: Werner `γ` or `p`, or the weight `t` of
/// `t ρ + (1 − t) I/D` for states read from a file.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Param {
    Gamma,
    P,
    Mix,
}

impl Param {
    fn domain(self) -> (f64, f64) {
        match self {
            Param::Gamma => (-1.0, 1.0),
            Param::P | Param::Mix => (0.0, 1.0),
        }
    }
}

/// Sweep settings before defaults and validation. Later layers override
/// earlier ones field by field.
#[derive(Clone, Debug, Default, Deserialize)]
pub struct PartialConfig {
    pub family: Option<Family>,
    pub d: Option<usize>,
    pub file: Option<PathBuf>,
    pub param: Option<Param>,
    pub start: Option<f64>,
    pub stop: Option<f64>,
    pub steps: Option<usize>,
    pub n: Option<usize>,
    pub k: Option<usize>,
    pub side: Option<String>,
    pub bell: Option<String>,
    pub backend: Option<String>,
    pub tol_alpha: Option<f64>,
    pub output: Option<PathBuf>,
    pub parallelism: Option<usize>,
}

pub const CONFIG_KEYS: &[&str] = &[
    "family",
    "d",
    "file",
    "param",
    "start",
    "stop",
    "steps",
    "n",
    "k",
    "side",
    "bell",
    "backend",
    "tol_alpha",
    "output",
    "parallelism",
];

impl PartialConfig {
    pub fn overlay(self, top: PartialConfig) -> PartialConfig {
        PartialConfig {
            family: top.family.or(self.family),
            d: top.d.or(self.d),
            file: top.file.or(self.file),
            param: top.param.or(self.param),
            start: top.start.or(self.start),
            stop: top.stop.or(self.stop),
            steps: top.steps.or(self.steps),
            n: top.n.or(self.n),
            k: top.k.or(self.k),
            side: top.side.or(self.side),
            bell: top.bell.or(self.bell),
            backend: top.backend.or(self.backend),
            tol_alpha: top.tol_alpha.or(self.tol_alpha),
            output: top.output.or(self.output),
            parallelism: top.parallelism.or(self.parallelism),
        }
    }

    /// Resolves relative `file` and `output` paths against `dir`.
    pub fn rebase(mut self, dir: &Path) -> PartialConfig {
        for p in [&mut self.file, &mut self.output].into_iter().flatten() {
            if p.is_relative() {
                *p = dir.join(&*p);
            }
        }
        self
    }
}

/// Parses `key = value` lines. Values are TOML scalars; bare words are
/// taken as strings. `#` starts a comment.
pub fn parse_config(text: &str) -> Result<PartialConfig, CliError> {
    let mut table = toml::Table::new();
    for (no, raw) in text.lines().enumerate() {
        let line = strip_comment(raw).trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(CliError::usage(format!("config line {}: expected key = value", no + 1)));
        };
        let (key, value) = (key.trim(), value.trim());
        if !CONFIG_KEYS.contains(&key) {
            return Err(CliError::usage(format!("config line {}: unknown key `{key}`", no + 1)));
        }
        if table.contains_key(key) {
            return Err(CliError::usage(format!(
                "config line {}: duplicate key `{key}`",
                no + 1
            )));
        }
        let parsed = format!("v = {value}")
            .parse::<toml::Table>()
            .ok()
            .and_then(|mut t| t.remove("v"))
            .unwrap_or_else(|| toml::Value::String(value.to_string()));
        table.insert(key.to_string(), parsed);
    }
    table
        .try_into()
        .map_err(|e: toml::de::Error| CliError::usage(format!("config: {}", e.message())))
}

fn strip_comment(line: &str) -> &str {
    let mut quoted = false;
    for (i, c) in line.char_indices() {
        match c {
            '"' => quoted = !quoted,
            '#' if !quoted => return &line[..i],
            _ => {}
        }
    }
    line
}

/// A validated sweep.
#[derive(Clone, Debug)]
pub struct SweepConfig {
    pub family: Family,
    pub d: usize,
    pub file: Option<PathBuf>,
    pub param: Param,
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
    pub n: usize,
    pub k: usize,
    pub side: Side,
    pub bell: BellKind,
    pub backend: Backend,
    pub tol_alpha: f64,
    pub output: Option<PathBuf>,
    pub parallelism: Option<usize>,
}

pub const DEFAULT_STEPS: usize = 81;
pub const DEFAULT_TOL: f64 = 1e-6;
pub const MIN_TOL: f64 = 1e-10;

impl TryFrom<PartialConfig> for SweepConfig {
    type Error = CliError;

    fn try_from(c: PartialConfig) -> Result<Self, CliError> {
        let family = c.family.unwrap_or(Family::Werner);
        let param = c.param.unwrap_or(match family {
            Family::Werner => Param::Gamma,
            Family::File => Param::Mix,
        });
        match (family, param, &c.file) {
            (Family::Werner, Param::Mix, _) => return Err(CliError::usage("param `mix` needs family `file`")),
            (Family::Werner, _, Some(_)) => return Err(CliError::usage("`file` given for family `werner`")),
            (Family::File, Param::Gamma | Param::P, _) => {
                return Err(CliError::usage("family `file` sweeps param `mix`"))
            }
            (Family::File, _, None) => return Err(CliError::usage("family `file` needs `file`")),
            _ => {}
        }
        let (lo, hi) = param.domain();
        let start = c.start.unwrap_or(lo);
        let stop = c.stop.unwrap_or(hi);
        if !(lo <= start && start < stop && stop <= hi) {
            return Err(CliError::usage(format!(
                "range [{start}, {stop}] must be increasing and inside [{lo}, {hi}]"
            )));
        }
        let steps = c.steps.unwrap_or(DEFAULT_STEPS);
        if steps < 2 {
            return Err(CliError::usage("steps must be at least 2"));
        }
        let d = c.d.unwrap_or(2);
        if family == Family::Werner && d < 2 {
            return Err(CliError::usage("d must be at least 2"));
        }
        let n = c.n.unwrap_or(1);
        let k = c.k.unwrap_or(1);
        if n == 0 || k == 0 {
            return Err(CliError::usage("n and k must be at least 1"));
        }
        let tol_alpha = c.tol_alpha.unwrap_or(DEFAULT_TOL);
        if tol_alpha.is_nan() || tol_alpha < MIN_TOL {
            return Err(CliError::usage(format!("tol_alpha must be at least {MIN_TOL:e}")));
        }
        if c.parallelism == Some(0) {
            return Err(CliError::usage("parallelism must be at least 1"));
        }
        Ok(SweepConfig {
            family,
            d,
            file: c.file,
            param,
            start,
            stop,
            steps,
            n,
            k,
            side: parse_opt(c.side.as_deref(), Side::Bob)?,
            bell: parse_opt(c.bell.as_deref(), BellKind::PhiPlus)?,
            backend: parse_opt(c.backend.as_deref(), Backend::Auto)?,
            tol_alpha,
            output: c.output,
            parallelism: c.parallelism,
        })
    }
}

fn parse_opt<T>(s: Option<&str>, default: T) -> Result<T, CliError>
where
    T: std::str::FromStr<Err = kext_core::Error>,
{
    s.map_or(Ok(default), |s| s.parse().map_err(invalid_input))
}

impl SweepConfig {
    /// Evenly spaced parameter values, endpoints included.
    pub fn grid(&self) -> Vec<f64> {
        let last = (self.steps - 1) as f64;
        (0..self.steps)
            .map(|i| match i {
                0 => self.start,
                i if i + 1 == self.steps => self.stop,
                i => self.start + (self.stop - self.start) * i as f64 / last,
            })
            .collect()
    }

    /// Builds the per-point state factory, reading the file once.
    pub fn states(&self) -> Result<StateSource, CliError> {
        match self.family {
            Family::Werner => Ok(StateSource::Werner {
                d: self.d,
                param: self.param,
            }),
            Family::File => {
                let path = self.file.as_ref().expect("validated");
                Ok(StateSource::Mix(load_file_state(path, None)?))
            }
        }
    }

    pub fn problem(&self, state: DensityOperator) -> Result<KExtProblem, CliError> {
        let p = KExtProblem::new(state, self.n, self.k)
            .map_err(invalid_input)?
            .with_side(self.side)
            .with_bell(self.bell);
        p.with_backend(self.backend).map_err(|e| match e {
            e @ kext_core::Error::BudgetExceeded { .. } => CliError::Solver(e),
            e => invalid_input(e),
        })
    }
}

pub enum StateSource {
    Werner { d: usize, param: Param },
    Mix(DensityOperator),
}

impl StateSource {
    pub fn at(&self, x: f64) -> Result<DensityOperator, CliError> {
        match self {
            StateSource::Werner { d, param } => {
                let params = match param {
                    Param::Gamma => WernerParams::from_gamma(*d, x),
                    _ => WernerParams::from_p(*d, x),
                };
                Ok(werner(params.map_err(invalid_input)?))
            }
            StateSource::Mix(rho) => {
                let id = HermitianOperator::identity(rho.layout().clone());
                let noise = id.scaled((1.0 - x) / rho.dim() as f64);
                let op = rho.op().scaled(x).add(&noise).map_err(invalid_input)?;
                DensityOperator::new(op).map_err(invalid_input)
            }
        }
    }
}

/// Reads a state file. `dims` supplies the bipartition when the file has
/// no layout line.
pub fn load_file_state(path: &Path, dims: Option<(usize, usize)>) -> Result<DensityOperator, CliError> {
    if !path.exists() {
        return Err(CliError::usage(format!("state file {} not found", path.display())));
    }
    let layout = dims.map(|(a, b)| SystemLayout::bipartite(a, b));
    load_state_with(path, layout.as_ref(), true).map_err(|e| match e {
        kext_core::Error::Io(source) => CliError::io(path, source),
        e => CliError::usage(format!("{}: {e}", path.display())),
    })
}

/// Parses `AxB`, e.g. `2x3`.
pub fn parse_dims(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected AxB, got `{s}`"))?;
    let parse = |t: &str| t.trim().parse::<usize>().map_err(|e| format!("`{t}`: {e}"));
    Ok((parse(a)?, parse(b)?))
}
