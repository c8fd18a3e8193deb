use kext_core::solver::{fidelity_threshold, lambda_min_alpha, Backend, KExtProblem};
use kext_core::states::{gamma_from_p, maximally_mixed, werner, BellKind, DensityOperator, WernerParams};
use kext_core::werner::{
    alpha_max_k1, alpha_quadratic, maxmixed_bound, mnp_alpha_max, mnp_threshold_numeric, reduced_eigenvalues,
    st_coefficients,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::CliError;

/// One line of the report.
#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    /// Largest observed deviation, or the worst margin for sign checks.
    pub residual: f64,
    pub tolerance: f64,
    pub details: Value,
}

impl Check {
    fn max_abs(name: &'static str, residual: f64, tolerance: f64, details: Value) -> Self {
        Check {
            name,
            passed: residual <= tolerance,
            residual,
            tolerance,
            details,
        }
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct ValidateOptions {
    /// Added to the single-copy closed form before every comparison.
    pub closed_form_shift: f64,
}

fn werner_gamma(d: usize, g: f64) -> Result<DensityOperator, CliError> {
    Ok(werner(WernerParams::from_gamma(d, g)?))
}

fn gamma_grid(points: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..points)
        .map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64)
        .collect()
}

fn max_of(it: impl IntoIterator<Item = f64>) -> f64 {
    it.into_iter().fold(0.0, f64::max)
}

/// Runs every check in order. Solver errors abort the run.
pub fn run_validation(opts: &ValidateOptions) -> Result<Vec<Check>, CliError> {
    let closed = |g: f64| alpha_max_k1(g) + opts.closed_form_shift;
    let mut out = Vec::new();

    let grid = gamma_grid(101, -1.0, 1.0);
    let sym = max_of(grid.iter().map(|&g| (closed(g) - closed(-g)).abs()));
    out.push(Check::max_abs("symmetry", sym, 1e-15, json!({ "points": grid.len() })));

    let root = max_of(grid.iter().map(|&g| alpha_quadratic(g, closed(g)).abs()));
    out.push(Check::max_abs(
        "root_property",
        root,
        1e-12,
        json!({ "points": grid.len() }),
    ));

    let mut chain = 0.0f64;
    for d in [2, 3, 4] {
        for i in 0..21 {
            let p = i as f64 / 20.0;
            chain = chain.max((mnp_alpha_max(p, d) - closed(gamma_from_p(p, d))).abs());
        }
    }
    out.push(Check::max_abs(
        "consistency_chain",
        chain,
        1e-10,
        json!({ "d": [2, 3, 4], "points": 21 }),
    ));

    let mut dense = 0.0f64;
    let dense_grid = gamma_grid(7, -0.9, 0.9);
    for d in [2, 3] {
        for &g in &dense_grid {
            let p = KExtProblem::new(werner_gamma(d, g)?, 1, 1)?.with_backend(Backend::Dense)?;
            dense = dense.max((fidelity_threshold(&p, 1e-8)?.alpha_star - closed(g)).abs());
        }
    }
    out.push(Check::max_abs(
        "analytic_vs_dense",
        dense,
        1e-6,
        json!({ "d": [2, 3], "points": dense_grid.len() }),
    ));

    let mut mnp = 0.0f64;
    for d in [2, 3] {
        for p in [0.0, 0.3, 0.7] {
            let state = werner(WernerParams::from_p(d, p)?);
            mnp = mnp.max((mnp_threshold_numeric(&state, 1e-8)? - closed(gamma_from_p(p, d))).abs());
        }
    }
    out.push(Check::max_abs(
        "mnp_vs_general",
        mnp,
        1e-6,
        json!({ "d": [2, 3], "p": [0.0, 0.3, 0.7] }),
    ));

    let mut mm = Vec::new();
    for k in 1..=3 {
        let p = KExtProblem::new(maximally_mixed(2, 2), 1, k)?;
        mm.push((k, fidelity_threshold(&p, 1e-8)?.alpha_star));
    }
    let mm_err = max_of(mm.iter().map(|&(k, a)| (a - maxmixed_bound(k)).abs()));
    out.push(Check::max_abs(
        "maxmixed_bound",
        mm_err,
        1e-6,
        json!({ "thresholds": mm.iter().map(|x| x.1).collect::<Vec<_>>() }),
    ));

    out.push(k_monotonicity()?);
    out.push(reduction_soundness()?);

    let mut blocks = 0.0f64;
    for g in [-0.8, -0.25, 0.5] {
        let dense = KExtProblem::new(werner_gamma(2, g)?, 2, 1)?;
        let s3 = dense.clone().with_backend(Backend::S3Blocks)?;
        for a in [0.6, 0.85] {
            blocks = blocks.max((lambda_min_alpha(&dense, a)? - lambda_min_alpha(&s3, a)?).abs());
        }
    }
    out.push(Check::max_abs(
        "blocks_vs_dense",
        blocks,
        1e-10,
        json!({ "d": 2, "n": 2 }),
    ));

    let mut bell = 0.0f64;
    for g in [-0.6, 0.3] {
        let p = KExtProblem::new(werner_gamma(3, g)?, 1, 1)?;
        let a = fidelity_threshold(&p, 1e-8)?.alpha_star;
        let b = fidelity_threshold(&p.with_bell(BellKind::PsiMinus), 1e-8)?.alpha_star;
        bell = bell.max((a - b).abs());
    }
    out.push(Check::max_abs("bell_choice", bell, 1e-6, json!({ "d": 3 })));
    Ok(out)
}

/// Margins `F_k − F_{k+1}` for k = 1, 2; negative values beyond the
/// tolerance violate the ordering.
fn k_monotonicity() -> Result<Check, CliError> {
    const TOL: f64 = 1e-6;
    let mut margins = Vec::new();
    for g in [-0.8, -0.3, 0.4] {
        let thresholds = (1..=3)
            .map(|k| {
                let p = KExtProblem::new(werner_gamma(2, g)?, 1, k)?;
                Ok(fidelity_threshold(&p, 1e-8)?.alpha_star)
            })
            .collect::<Result<Vec<f64>, CliError>>()?;
        margins.push(json!({
            "gamma": g,
            "thresholds": thresholds,
            "margins": thresholds.windows(2).map(|w| w[0] - w[1]).collect::<Vec<_>>(),
        }));
    }
    let worst = margins
        .iter()
        .flat_map(|m| m["margins"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()))
        .fold(f64::INFINITY, f64::min);
    Ok(Check {
        name: "k_monotonicity",
        passed: worst >= -TOL,
        residual: worst,
        tolerance: TOL,
        details: json!({ "d": 2, "curves": margins }),
    })
}

/// The sign of the reduced 4×4 block agrees with the dense probe.
fn reduction_soundness() -> Result<Check, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut checked, mut mismatches) = (0, 0);
    while checked < 20 {
        let g: f64 = rng.random_range(-1.0..=1.0);
        let a: f64 = rng.random_range(0.5..=1.0);
        if (a - alpha_max_k1(g)).abs() < 1e-6 {
            continue;
        }
        let p = KExtProblem::new(werner_gamma(3, g)?, 1, 1)?.with_bell(BellKind::PsiMinus);
        let dense = lambda_min_alpha(&p, a)?;
        let reduced = reduced_eigenvalues(&st_coefficients(g, a))
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        if (dense < 0.0) != (reduced < 0.0) {
            mismatches += 1;
        }
        checked += 1;
    }
    Ok(Check {
        name: "reduction_soundness",
        passed: mismatches == 0,
        residual: mismatches as f64,
        tolerance: 0.0,
        details: json!({ "points": checked, "mismatches": mismatches }),
    })
}

pub fn report_lines(checks: &[Check]) -> Vec<String> {
    let failed = checks.iter().filter(|c| !c.passed).count();
    let mut lines: Vec<String> = checks
        .iter()
        .map(|c| serde_json::to_string(c).expect("serializable"))
        .collect();
    lines.push(json!({ "summary": true, "checks": checks.len(), "failed": failed }).to_string());
    lines
}
