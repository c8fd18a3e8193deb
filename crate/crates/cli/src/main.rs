use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use kext_cli::config::{load_file_state, parse_dims};
use kext_cli::recipe::{self, SeriesOutcome};
use kext_cli::sweep::{self, sweep_to_file};
use kext_cli::{parse_config, run_validation, CliError, Family, PartialConfig, SweepConfig, ValidateOptions};
use kext_core::solver::{fidelity_threshold, Backend, KExtProblem, Side};
use kext_core::states::{werner, BellKind, WernerParams};
use serde_json::json;

#[derive(Parser)]
#[command(name = "kext", version, about = "EPR-pair fidelity thresholds of k-extendible maps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fidelity threshold of one state.
    Threshold(ThresholdArgs),
    /// Threshold curve over a parameter grid, written as CSV.
    Sweep(SweepArgs),
    /// Cross-checks closed forms against the solvers; prints JSON lines.
    Validate(ValidateArgs),
    /// Boundary of the cloning tradeoff region as CSV.
    Ellipse(EllipseArgs),
    /// Lists the builtin recipes.
    Recipes,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct ThresholdArgs {
    #[arg(long, value_enum)]
    family: Option<Family>,
    /// Local dimension of a Werner state.
    #[arg(long)]
    d: Option<usize>,
    /// Werner parameter of `I + γV`.
    #[arg(long, conflicts_with = "p")]
    gamma: Option<f64>,
    /// Weight of the symmetric projector.
    #[arg(long)]
    p: Option<f64>,
    /// State file; relative paths also resolve against the fixture directory.
    #[arg(long, conflicts_with_all = ["gamma", "p", "d"])]
    file: Option<PathBuf>,
    /// Local dimensions `AxB` for state files without a layout line.
    #[arg(long, value_parser = parse_dims)]
    dims: Option<(usize, usize)>,
    #[arg(long, default_value_t = 1)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    k: usize,
    #[arg(long, default_value = "bob")]
    side: Side,
    #[arg(long, default_value = "phi_plus")]
    bell: BellKind,
    #[arg(long, default_value = "auto")]
    backend: Backend,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Print one JSON object instead of aligned text.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
#[command(group = clap::ArgGroup::new("source").required(true).args(["config", "recipe"]))]
struct SweepArgs {
    /// `key = value` sweep configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Builtin recipe name or recipe file.
    #[arg(long)]
    recipe: Option<String>,
    /// CSV file for --config (stdout if absent), directory for --recipe.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Only run these recipe series.
    #[arg(long, requires = "recipe")]
    series: Vec<String>,
    /// Overrides the grid size.
    #[arg(long)]
    steps: Option<usize>,
    /// Worker threads; KEXT_THREADS takes precedence.
    #[arg(long)]
    parallelism: Option<usize>,
}

#[derive(Args)]
struct ValidateArgs {
    /// Shifts the single-copy closed form; a mutation check for the report.
    #[arg(long, default_value_t = 0.0)]
    perturb_closed_form: f64,
}

#[derive(Args)]
struct EllipseArgs {
    #[arg(long, default_value_t = 360)]
    points: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Threshold(a) => threshold(a),
        Command::Sweep(a) => sweep_cmd(a),
        Command::Validate(a) => validate(a),
        Command::Ellipse(a) => ellipse(a),
        Command::Recipes => recipes(),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("kext: error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn threshold(a: ThresholdArgs) -> Result<(), CliError> {
    let family = a
        .family
        .unwrap_or(if a.file.is_some() { Family::File } else { Family::Werner });
    let state = match family {
        Family::Werner => {
            let d =
                a.d.ok_or_else(|| CliError::usage("--d is required for Werner states"))?;
            let params = match (a.gamma, a.p) {
                (Some(g), None) => WernerParams::from_gamma(d, g),
                (None, Some(p)) => WernerParams::from_p(d, p),
                _ => return Err(CliError::usage("give exactly one of --gamma and --p")),
            };
            werner(params.map_err(|e| CliError::usage(e.to_string()))?)
        }
        Family::File => {
            let path = a
                .file
                .ok_or_else(|| CliError::usage("--file is required for family file"))?;
            load_file_state(&resolve_state_path(path), a.dims)?
        }
    };
    if a.tol.is_nan() || a.tol < kext_cli::config::MIN_TOL {
        return Err(CliError::usage(format!(
            "--tol must be at least {:e}",
            kext_cli::config::MIN_TOL
        )));
    }
    let invalid = |e: kext_core::Error| match e {
        e @ kext_core::Error::BudgetExceeded { .. } => CliError::Solver(e),
        e => CliError::usage(e.to_string()),
    };
    let problem = KExtProblem::new(state, a.n, a.k)
        .map_err(invalid)?
        .with_side(a.side)
        .with_bell(a.bell)
        .with_backend(a.backend)
        .map_err(invalid)?;
    let start = Instant::now();
    let r = fidelity_threshold(&problem, a.tol)?;
    let wall = start.elapsed().as_secs_f64();
    if a.json {
        let obj = json!({
            "alpha_star": r.alpha_star,
            "backend": r.backend.name(),
            "full_rank": r.full_rank,
            "lambda_residual": r.lambda_residual,
            "wall_time_s": wall,
        });
        println!("{obj}");
    } else {
        println!("alpha_star       {:.10}", r.alpha_star);
        println!("backend          {}", r.backend);
        println!("full_rank        {}", r.full_rank);
        println!("lambda_residual  {:e}", r.lambda_residual);
        println!("wall_time_s      {wall:.3}");
    }
    Ok(())
}

/// Falls back to the bundled fixtures for bare file names.
fn resolve_state_path(path: PathBuf) -> PathBuf {
    if path.exists() || path.is_absolute() {
        return path;
    }
    let bundled = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(&path);
    if bundled.exists() {
        bundled
    } else {
        path
    }
}

fn sweep_cmd(a: SweepArgs) -> Result<(), CliError> {
    let overrides = PartialConfig {
        steps: a.steps,
        ..Default::default()
    };
    if let Some(name) = a.recipe {
        let (name, recipe) = recipe::load_recipe(&name)?;
        let opts = recipe::RunOptions {
            out_dir: a.out.unwrap_or_else(|| PathBuf::from(".")),
            only: a.series,
            overrides,
            parallelism: a.parallelism,
        };
        for report in recipe::run_recipe(&name, &recipe, &opts)? {
            let what = match &report.outcome {
                SeriesOutcome::Rows(rows) => format!("{} rows", rows.len()),
                SeriesOutcome::NotReproduced(why) => format!("{}: {why}", recipe::NOT_REPRODUCED),
                SeriesOutcome::Ellipse(points) => format!("{points} boundary points"),
            };
            eprintln!("{} -> {} ({what})", report.name, report.path.display());
        }
        return Ok(());
    }
    let path = a.config.expect("clap enforces the group");
    let text = std::fs::read_to_string(&path).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
    let dir = path.parent().unwrap_or(std::path::Path::new("."));
    let base = parse_config(&text)?.rebase(dir);
    let cfg = SweepConfig::try_from(base.overlay(overrides))?;
    let pool = sweep::thread_pool(sweep::thread_count(a.parallelism.or(cfg.parallelism))?)?;
    match a.out.or_else(|| cfg.output.clone()) {
        Some(out) => {
            let rows = sweep_to_file(&cfg, &out, &pool)?;
            eprintln!("{} rows -> {}", rows.len(), out.display());
        }
        None => print!("{}", sweep::format_csv(&sweep::run_sweep(&cfg, &pool)?)),
    }
    Ok(())
}

fn validate(a: ValidateArgs) -> Result<(), CliError> {
    let checks = run_validation(&ValidateOptions {
        closed_form_shift: a.perturb_closed_form,
    })?;
    for line in kext_cli::validate::report_lines(&checks) {
        println!("{line}");
    }
    match checks.iter().filter(|c| !c.passed).count() {
        0 => Ok(()),
        n => Err(CliError::Validation(n)),
    }
}

fn ellipse(a: EllipseArgs) -> Result<(), CliError> {
    if a.points < 3 {
        return Err(CliError::usage("--points must be at least 3"));
    }
    let csv = recipe::ellipse_csv(a.points);
    match a.out {
        Some(p) => std::fs::write(&p, csv).map_err(|e| CliError::io(&p, e)),
        None => {
            print!("{csv}");
            Ok(())
        }
    }
}

fn recipes() -> Result<(), CliError> {
    for (name, _) in recipe::BUILTIN {
        let (_, r) = recipe::load_recipe(name)?;
        println!("{name:24} {}", r.description);
    }
    Ok(())
}
