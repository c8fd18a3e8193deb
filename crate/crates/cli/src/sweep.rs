use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use kext_core::solver::{fidelity_threshold, Backend};
use rayon::prelude::*;

use crate::config::SweepConfig;
use crate::error::CliError;

pub const CSV_HEADER: &str = "# kext-csv v1";
pub const CSV_COLUMNS: &str = "param,alpha_star,backend,lambda_residual";
pub const THREADS_ENV: &str = "KEXT_THREADS";

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub param: f64,
    pub alpha_star: f64,
    pub backend: Backend,
    pub lambda_residual: f64,
}

/// Worker count: `KEXT_THREADS`, then `requested`, then the machine's.
pub fn thread_count(requested: Option<usize>) -> Result<usize, CliError> {
    if let Ok(v) = std::env::var(THREADS_ENV) {
        return match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(CliError::usage(format!(
                "{THREADS_ENV} must be a positive integer, got `{v}`"
            ))),
        };
    }
    Ok(requested.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get())))
}

pub fn thread_pool(threads: usize) -> Result<rayon::ThreadPool, CliError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::usage(format!("thread pool: {e}")))
}

/// Fails with [`kext_core::Error::BudgetExceeded`] if no point of the sweep
/// fits the configured backend. The budget depends only on dimensions.
pub fn check_budget(cfg: &SweepConfig) -> Result<(), CliError> {
    let source = cfg.states()?;
    cfg.problem(source.at(cfg.start)?).map(|_| ())
}

/// Solves every grid point on `pool`; rows come back in grid order.
pub fn run_sweep(cfg: &SweepConfig, pool: &rayon::ThreadPool) -> Result<Vec<SweepRow>, CliError> {
    let source = cfg.states()?;
    let grid = cfg.grid();
    pool.install(|| {
        grid.par_iter()
            .map(|&x| {
                let problem = cfg.problem(source.at(x)?)?;
                let r = fidelity_threshold(&problem, cfg.tol_alpha)?;
                log::debug!("param {x}: alpha* = {}", r.alpha_star);
                Ok(SweepRow {
                    param: x,
                    alpha_star: r.alpha_star,
                    backend: r.backend,
                    lambda_residual: r.lambda_residual,
                })
            })
            .collect()
    })
}

/// Grid values print without accumulated rounding noise.
fn format_param(x: f64) -> String {
    let r = (x * 1e12).round() / 1e12;
    format!("{}", if r == 0.0 { 0.0 } else { r })
}

pub fn format_row(row: &SweepRow) -> String {
    format!(
        "{},{:.10},{},{:e}",
        format_param(row.param),
        row.alpha_star,
        row.backend,
        row.lambda_residual
    )
}

pub fn csv_preamble() -> String {
    format!("{CSV_HEADER}\n{CSV_COLUMNS}\n")
}

pub fn format_csv(rows: &[SweepRow]) -> String {
    let mut out = csv_preamble();
    for row in rows {
        let _ = writeln!(out, "{}", format_row(row));
    }
    out
}

/// Removes the files it tracks when dropped, unless committed.
#[derive(Debug, Default)]
pub struct OutputGuard {
    paths: Vec<PathBuf>,
}

impl OutputGuard {
    /// Creates `path` with `contents` and tracks it.
    pub fn create(&mut self, path: &Path, contents: &str) -> Result<(), CliError> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        }
        self.paths.push(path.to_path_buf());
        fs::write(path, contents).map_err(|e| CliError::io(path, e))
    }

    pub fn append(&self, path: &Path, contents: &str) -> Result<(), CliError> {
        use std::io::Write;
        let mut f = fs::OpenOptions::new()
            .append(true)
            .open(path)
            .map_err(|e| CliError::io(path, e))?;
        f.write_all(contents.as_bytes()).map_err(|e| CliError::io(path, e))
    }

    pub fn commit(mut self) -> Vec<PathBuf> {
        std::mem::take(&mut self.paths)
    }
}

impl Drop for OutputGuard {
    fn drop(&mut self) {
        for p in &self.paths {
            if fs::remove_file(p).is_ok() {
                log::warn!("removed partial output {}", p.display());
            }
        }
    }
}

/// Runs a sweep, writing the CSV to `out`. The file appears with its
/// header when the run starts and is removed if any point fails.
pub fn sweep_to_file(cfg: &SweepConfig, out: &Path, pool: &rayon::ThreadPool) -> Result<Vec<SweepRow>, CliError> {
    let mut guard = OutputGuard::default();
    guard.create(out, &csv_preamble())?;
    let rows = run_sweep(cfg, pool)?;
    let body: String = rows.iter().map(|r| format_row(r) + "\n").collect();
    guard.append(out, &body)?;
    guard.commit();
    Ok(rows)
}
