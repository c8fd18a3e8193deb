use num_complex::Complex64;

use super::probe::{oriented_state, probe_factor, ProbeAxes};
use super::problem::{Backend, KExtProblem, DENSE_LIMIT};
use super::s3;
use crate::error::{Error, Result};
use crate::linalg::{dot, lowest_eigenpair, Dense, KronSum, LanczosOptions, LinearMap, Scalar};

/// A probe counts as negative when `λ_min < −TOL_EIG`.
pub const TOL_EIG: f64 = 1e-9;
pub const TOL_ALPHA: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct ThresholdOptions {
    pub tol_alpha: f64,
    /// Negativity margin in units of `‖ρ‖ⁿ`, the scale of the probe.
    pub tol_eig: f64,
    pub lanczos: LanczosOptions,
}

impl Default for ThresholdOptions {
    fn default() -> Self {
        Self {
            tol_alpha: TOL_ALPHA,
            tol_eig: TOL_EIG,
            lanczos: LanczosOptions::default(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ThresholdResult {
    /// Largest probed `α` with a certified negative eigenvalue.
    pub alpha_star: f64,
    /// Every probe `(α, λ_min)`, sorted by `α`.
    pub lambda_at: Vec<(f64, f64)>,
    /// Whether the state is full rank, so that `alpha_star` is attained.
    pub full_rank: bool,
    /// Eigenvector of the last negative probe, in the probe's layout.
    pub certificate: Option<Vec<Complex64>>,
    pub backend: Backend,
    /// `λ_min` at the sample closest to `alpha_star`.
    pub lambda_residual: f64,
}

struct Sample<T> {
    lambda: f64,
    /// `⟨v|H(α)|v⟩` and `⟨v|∂_α H|v⟩` for the returned vector.
    line: Option<(f64, f64)>,
    vector: Option<Vec<T>>,
}

trait Evaluator<T> {
    fn eval(&mut self, alpha: f64) -> Result<Sample<T>>;
}

/// `H(α) = αP − Q` with both terms materialized once.
struct DenseEval<T> {
    p: Dense<T>,
    q: Dense<T>,
}

impl<T: Scalar> DenseEval<T> {
    fn new(axes: &ProbeAxes, rho_t: &Dense<T>, problem: &KExtProblem) -> Self {
        let p = axes.kron_sum(rho_t, &Dense::identity(4)).to_dense();
        let q = axes
            .kron_sum(rho_t, &probe_factor::<T>(0.0, problem.bell()).scaled(-1.0))
            .to_dense();
        Self { p, q }
    }
}

fn lowest_dense<T: Scalar>(h: &Dense<T>, p: &dyn LinearMap<T>) -> Result<Sample<T>> {
    let (values, vectors) = T::eigh(h, true)?;
    let v = vectors.expect("vectors requested").column(0);
    Ok(line_sample(values[0], v, h, p))
}

fn line_sample<T: Scalar>(lambda: f64, v: Vec<T>, h: &dyn LinearMap<T>, p: &dyn LinearMap<T>) -> Sample<T> {
    let mut w = vec![T::zero(); v.len()];
    let nrm = dot(&v, &v).re();
    h.apply(&v, &mut w);
    let rq = dot(&v, &w).re() / nrm;
    p.apply(&v, &mut w);
    let slope = dot(&v, &w).re() / nrm;
    Sample {
        lambda,
        line: Some((rq, slope)),
        vector: Some(v),
    }
}

impl<T: Scalar> Evaluator<T> for DenseEval<T> {
    fn eval(&mut self, alpha: f64) -> Result<Sample<T>> {
        let h = self.p.scaled(alpha).sub(&self.q);
        lowest_dense(&h, &self.p)
    }
}

/// Matrix-free probe, warm-started from the previous eigenvector.
struct IterEval<T> {
    axes: ProbeAxes,
    rho_t: Dense<T>,
    bell: crate::states::BellKind,
    p: KronSum<T>,
    opts: LanczosOptions,
    warm: Option<Vec<T>>,
}

impl<T: Scalar> Evaluator<T> for IterEval<T> {
    fn eval(&mut self, alpha: f64) -> Result<Sample<T>> {
        let h = self.axes.kron_sum(&self.rho_t, &probe_factor::<T>(alpha, self.bell));
        let dim = LinearMap::<T>::dim(&h);
        match lowest_eigenpair(&h, &self.opts, self.warm.as_deref()) {
            Ok(pair) => {
                self.warm = Some(pair.vector.clone());
                Ok(line_sample(pair.value, pair.vector, &h, &self.p))
            }
            Err(Error::NoConvergence { iterations, residual }) if dim <= DENSE_LIMIT => {
                log::warn!(
                    "iterative solver stalled at alpha={alpha} after {iterations} applications \
                     (residual {residual:e}); using the dense backend"
                );
                let s = lowest_dense(&h.to_dense(), &self.p)?;
                self.warm = s.vector.clone();
                Ok(s)
            }
            Err(e) => Err(e),
        }
    }
}

struct BlockEval<'a> {
    problem: &'a KExtProblem,
}

impl Evaluator<Complex64> for BlockEval<'_> {
    fn eval(&mut self, alpha: f64) -> Result<Sample<Complex64>> {
        Ok(Sample {
            lambda: s3::problem_lambda_min(self.problem, alpha)?,
            line: None,
            vector: None,
        })
    }
}

fn field_evaluator<T: Scalar>(
    problem: &KExtProblem,
    backend: Backend,
    rho_t: Dense<T>,
    opts: &ThresholdOptions,
) -> Box<dyn Evaluator<T>> {
    let axes = ProbeAxes::from_problem(problem);
    match backend {
        Backend::Dense => Box::new(DenseEval::new(&axes, &rho_t, problem)),
        _ => {
            let p = axes.kron_sum(&rho_t, &Dense::identity(4));
            Box::new(IterEval {
                axes,
                rho_t,
                bell: problem.bell(),
                p,
                opts: opts.lanczos.clone(),
                warm: None,
            })
        }
    }
}

/// Smallest eigenvalue of the probe at `alpha` through the resolved backend.
pub fn lambda_min_alpha(problem: &KExtProblem, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let opts = ThresholdOptions::default();
    match problem.resolved_backend()? {
        Backend::S3Blocks => s3::problem_lambda_min(problem, alpha),
        backend => {
            let rho = oriented_state(problem)?;
            if rho.op().is_real() {
                let rt = rho.op().matrix::<f64>().transpose();
                Ok(field_evaluator(problem, backend, rt, &opts).eval(alpha)?.lambda)
            } else {
                let rt = rho.op().matrix::<Complex64>().transpose();
                Ok(field_evaluator(problem, backend, rt, &opts).eval(alpha)?.lambda)
            }
        }
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if (0.0..=1.0).contains(&alpha) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("alpha {alpha} outside [0, 1]")))
    }
}

/// `sup{α : λ_min(α) < −tol_eig}` to within `tol_alpha`.
pub fn fidelity_threshold(problem: &KExtProblem, tol_alpha: f64) -> Result<ThresholdResult> {
    fidelity_threshold_with(
        problem,
        &ThresholdOptions {
            tol_alpha,
            ..ThresholdOptions::default()
        },
    )
}

pub fn fidelity_threshold_with(problem: &KExtProblem, opts: &ThresholdOptions) -> Result<ThresholdResult> {
    if opts.tol_alpha.is_nan() || opts.tol_alpha < 1e-10 {
        return Err(Error::InvalidParameter(format!(
            "tol_alpha {} below 1e-10",
            opts.tol_alpha
        )));
    }
    let backend = problem.resolved_backend()?;
    let full_rank = problem.state().is_full_rank()?;
    let norm = problem.state().op().eigenvalues()?.into_iter().fold(0.0, f64::max);
    let opts = &ThresholdOptions {
        tol_eig: opts.tol_eig * norm.powi(problem.copies() as i32),
        ..opts.clone()
    };
    let (lambda_at, alpha_star, certificate) = match backend {
        Backend::S3Blocks => search(&mut BlockEval { problem }, opts)?,
        _ => {
            let rho = oriented_state(problem)?;
            if rho.op().is_real() {
                let rt = rho.op().matrix::<f64>().transpose();
                search(field_evaluator(problem, backend, rt, opts).as_mut(), opts)?
            } else {
                let rt = rho.op().matrix::<Complex64>().transpose();
                search(field_evaluator(problem, backend, rt, opts).as_mut(), opts)?
            }
        }
    };
    let lambda_residual = lambda_at
        .iter()
        .min_by(|a, b| (a.0 - alpha_star).abs().total_cmp(&(b.0 - alpha_star).abs()))
        .map_or(f64::NAN, |s| s.1);
    Ok(ThresholdResult {
        alpha_star,
        lambda_at,
        full_rank,
        certificate,
        backend,
        lambda_residual,
    })
}

type SearchOutput = (Vec<(f64, f64)>, f64, Option<Vec<Complex64>>);

/// Bisection on `[0, 1]`, accelerated by certified tangent steps.
///
/// For a unit vector `v`, `λ_min(α') ≤ ⟨v|H(α')|v⟩ = rq + (α' − α)·slope`,
/// so negativity is certified up to the root of that line without another
/// eigensolve. The next probe is placed there, which makes the search a
/// safeguarded Newton iteration from below.
fn search<T: Scalar, E: Evaluator<T> + ?Sized>(eval: &mut E, opts: &ThresholdOptions) -> Result<SearchOutput> {
    let (tol_a, tol_e) = (opts.tol_alpha, opts.tol_eig);
    let mut samples = Vec::new();
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    let mut certificate: Option<Vec<T>> = None;
    let mut next = 0.5;
    // set after a tangent step shorter than `tol_alpha`; the next one bisects
    let mut short_step = false;
    while hi - lo > tol_a {
        let a = if next >= lo && next < hi && next > 0.0 {
            next
        } else {
            0.5 * (lo + hi)
        };
        let s = eval.eval(a)?;
        samples.push((a, s.lambda));
        if s.lambda < -tol_e {
            lo = a;
            certificate = s.vector;
            next = 0.5 * (lo + hi);
            if let Some((rq, slope)) = s.line {
                if slope > 0.0 && rq < -tol_e {
                    let t = a + (-2.0 * tol_e - rq) / slope;
                    if t > lo && t < hi {
                        // everything up to `t` is certified negative
                        lo = t;
                    }
                    let short = t - a < tol_a;
                    next = match (short, short_step) {
                        (false, _) => lo,
                        (true, false) => lo + 0.75 * tol_a,
                        (true, true) => 0.5 * (lo + hi),
                    };
                    short_step = short;
                }
            }
        } else {
            hi = a;
            next = 0.5 * (lo + hi);
        }
    }
    samples.sort_by(|x, y| x.0.total_cmp(&y.0));
    let cert = certificate.map(|v| v.into_iter().map(T::to_c64).collect());
    Ok((samples, lo, cert))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{maximally_mixed, werner, WernerParams};
    use crate::werner::{alpha_max_k1, maxmixed_bound};

    #[test]
    fn maximally_mixed_eigenvalue_triple() {
        let p = KExtProblem::new(maximally_mixed(2, 2), 1, 1).unwrap();
        // {2α, (4α−3)/2, (4α−1)/2} scaled by 1/4
        let l = lambda_min_alpha(&p, 0.6).unwrap();
        assert!((l - (-0.3 / 4.0)).abs() < 1e-12);
        assert!(lambda_min_alpha(&p, 0.75).unwrap().abs() < 1e-10);
    }

    #[test]
    fn maximally_mixed_thresholds() {
        for k in [1, 3] {
            let p = KExtProblem::new(maximally_mixed(2, 2), 1, k).unwrap();
            let r = fidelity_threshold(&p, 1e-8).unwrap();
            assert!(
                (r.alpha_star - maxmixed_bound(k)).abs() < 1e-6,
                "k={k}: {}",
                r.alpha_star
            );
            assert!(r.full_rank);
        }
    }

    #[test]
    fn werner_single_copy() {
        let w = werner(WernerParams::from_gamma(3, 0.5).unwrap());
        let p = KExtProblem::new(w, 1, 1).unwrap();
        assert!(lambda_min_alpha(&p, 0.82).unwrap() > 0.0);
        let r = fidelity_threshold(&p, 1e-8).unwrap();
        assert!((r.alpha_star - alpha_max_k1(0.5)).abs() < 1e-6);
        assert!(r.alpha_star <= alpha_max_k1(0.5) + 1e-8);
        assert!(r.certificate.is_some());
        let l: Vec<f64> = r.lambda_at.iter().map(|s| s.1).collect();
        assert!(l.windows(2).all(|w| w[0] <= w[1] + 1e-12));
    }

    #[test]
    fn s3_backend_matches_dense() {
        let w = werner(WernerParams::from_gamma(2, -0.5).unwrap());
        let dense = KExtProblem::new(w.clone(), 1, 1).unwrap();
        let blocks = dense.clone().with_backend(Backend::S3Blocks).unwrap();
        for a in [0.3, 0.7, 0.81, 0.9] {
            let x = lambda_min_alpha(&dense, a).unwrap();
            let y = lambda_min_alpha(&blocks, a).unwrap();
            assert!((x - y).abs() < 1e-12, "alpha={a}: {x} vs {y}");
        }
    }

    #[test]
    fn iterative_matches_dense() {
        let w = werner(WernerParams::from_gamma(2, -0.3).unwrap());
        let d = KExtProblem::new(w.clone(), 1, 2)
            .unwrap()
            .with_backend(Backend::Dense)
            .unwrap();
        let i = d.clone().with_backend(Backend::Iterative).unwrap();
        let a = 0.7;
        let x = lambda_min_alpha(&d, a).unwrap();
        let y = lambda_min_alpha(&i, a).unwrap();
        assert!((x - y).abs() < 1e-8, "{x} vs {y}");
    }

    #[test]
    fn rejects_bad_tolerance() {
        let p = KExtProblem::new(maximally_mixed(2, 2), 1, 1).unwrap();
        assert!(fidelity_threshold(&p, 1e-12).is_err());
        assert!(lambda_min_alpha(&p, 1.5).is_err());
    }
}
