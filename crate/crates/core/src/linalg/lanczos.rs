use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::dense::{dot, norm, Dense};
use super::kron_sum::LinearMap;
use super::scalar::Scalar;
use crate::error::{Error, Result};

/// Default residual tolerance, relative to the spectral-norm estimate.
pub const TOL_ITERATIVE: f64 = 1e-8;
pub const DEFAULT_SEED: u64 = 0x6b65_7874;

#[derive(Clone, Debug)]
pub struct LanczosOptions {
    /// Stop when `‖Hy − θy‖ ≤ tol · ‖H‖` (norm estimated from Ritz values).
    pub tol: f64,
    /// Budget of operator applications.
    pub max_iter: usize,
    /// Largest Krylov basis before a restart.
    pub basis: usize,
    /// Ritz vectors retained across a restart.
    pub keep: usize,
    pub seed: u64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        Self {
            tol: TOL_ITERATIVE,
            max_iter: 5000,
            basis: 40,
            keep: 10,
            seed: DEFAULT_SEED,
        }
    }
}

#[derive(Clone, Debug)]
pub struct EigPair<T> {
    pub value: f64,
    /// Unit eigenvector estimate.
    pub vector: Vec<T>,
    pub residual: f64,
    pub applications: usize,
}

/// Smallest eigenvalue of a self-adjoint map by thick-restart Lanczos.
pub fn eig_min_iterative<T: Scalar, M: LinearMap<T> + ?Sized>(h: &M, tol: f64, max_iter: usize) -> Result<f64> {
    let opts = LanczosOptions {
        tol,
        max_iter,
        ..LanczosOptions::default()
    };
    Ok(lowest_eigenpair(h, &opts, None)?.value)
}

/// Lowest eigenpair, optionally warm-started from a previous eigenvector.
///
/// A warm start is mixed with a seeded random vector so that eigenvalues
/// from symmetry sectors absent in the previous vector are still found.
pub fn lowest_eigenpair<T: Scalar, M: LinearMap<T> + ?Sized>(
    h: &M,
    opts: &LanczosOptions,
    start: Option<&[T]>,
) -> Result<EigPair<T>> {
    let n = h.dim();
    if n == 0 {
        return Err(Error::InvalidParameter("empty operator".into()));
    }
    let m = opts.basis.max(3);
    if n <= m {
        return dense_lowest(h);
    }
    let keep = opts.keep.clamp(1, m - 2);

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut v0: Vec<T> = (0..n).map(|_| T::random(&mut rng)).collect();
    if let Some(s) = start.filter(|s| s.len() == n && norm(s) > 0.0) {
        let w = 0.05 * norm(s) / norm(&v0);
        for (a, &b) in v0.iter_mut().zip(s) {
            *a = b + a.scale(w);
        }
    }
    normalize(&mut v0);

    let mut basis: Vec<Vec<T>> = vec![v0];
    let mut g = Dense::<T>::zeros(m);
    let mut j = 0usize;
    let mut applications = 0usize;
    let mut w = vec![T::zero(); n];
    let mut last_residual = f64::INFINITY;

    loop {
        // Expand the basis; `basis[j]` is the next vector to process.
        let mut beta = 0.0;
        let mut breakdown = false;
        while j < m {
            if applications >= opts.max_iter {
                return Err(Error::NoConvergence {
                    iterations: applications,
                    residual: last_residual,
                });
            }
            h.apply(&basis[j], &mut w);
            applications += 1;
            let w_norm = norm(&w);
            for i in 0..=j {
                let c = dot(&basis[i], &w);
                g[(i, j)] = c;
                g[(j, i)] = c.conj();
                axpy(&mut w, -c, &basis[i]);
            }
            g[(j, j)] = T::from_real(g[(j, j)].re());
            for b in &basis {
                let c = dot(b, &w);
                axpy(&mut w, -c, b);
            }
            j += 1;
            beta = norm(&w);
            basis.truncate(j);
            if beta <= 1e-13 * w_norm.max(f64::MIN_POSITIVE) {
                breakdown = true;
                break;
            }
            let mut next = w.clone();
            next.iter_mut().for_each(|x| *x = x.scale(1.0 / beta));
            basis.push(next);
        }

        let gj = Dense::from_fn(j, |a, b| g[(a, b)]);
        let (theta, s) = T::eigh(&gj, true)?;
        let s = s.expect("requested");
        let scale = theta[0].abs().max(theta[j - 1].abs()).max(f64::MIN_POSITIVE);
        let estimate = if breakdown {
            0.0
        } else {
            beta * s[(j - 1, 0)].abs_sqr().sqrt()
        };

        if estimate <= opts.tol * scale || breakdown {
            let y = combine(&basis[..j], &s, 0);
            h.apply(&y, &mut w);
            applications += 1;
            let residual = w
                .iter()
                .zip(&y)
                .map(|(&hy, &yy)| (hy - yy.scale(theta[0])).abs_sqr())
                .sum::<f64>()
                .sqrt();
            last_residual = residual;
            if residual <= opts.tol * scale || (breakdown && residual <= 1e3 * opts.tol * scale) {
                return Ok(EigPair {
                    value: theta[0],
                    vector: y,
                    residual,
                    applications,
                });
            }
            if breakdown {
                // Lost orthogonality; restart from the current Ritz vector.
                let mut fresh = y;
                normalize(&mut fresh);
                basis = vec![fresh];
                j = 0;
                continue;
            }
        } else {
            last_residual = estimate;
        }

        // Thick restart: lowest Ritz vectors plus the continuation vector.
        let l = keep.min(j - 1);
        let cont = basis.pop().expect("continuation vector");
        let mut fresh: Vec<Vec<T>> = (0..l).map(|c| combine(&basis, &s, c)).collect();
        fresh.push(cont);
        basis = fresh;
        g = Dense::zeros(m);
        for (c, &t) in theta.iter().take(l).enumerate() {
            g[(c, c)] = T::from_real(t);
        }
        j = l;
    }
}

fn dense_lowest<T: Scalar, M: LinearMap<T> + ?Sized>(h: &M) -> Result<EigPair<T>> {
    let n = h.dim();
    let mut cols = Dense::<T>::zeros(n);
    let mut e = vec![T::zero(); n];
    let mut col = vec![T::zero(); n];
    for c in 0..n {
        e[c] = T::one();
        h.apply(&e, &mut col);
        e[c] = T::zero();
        for r in 0..n {
            cols[(r, c)] = col[r];
        }
    }
    let (vals, vecs) = T::eigh(&cols, true)?;
    Ok(EigPair {
        value: vals[0],
        vector: vecs.expect("requested").column(0),
        residual: 0.0,
        applications: n,
    })
}

fn combine<T: Scalar>(basis: &[Vec<T>], s: &Dense<T>, col: usize) -> Vec<T> {
    let mut y = vec![T::zero(); basis[0].len()];
    for (i, b) in basis.iter().enumerate() {
        axpy(&mut y, s[(i, col)], b);
    }
    y
}

fn axpy<T: Scalar>(y: &mut [T], a: T, x: &[T]) {
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

fn normalize<T: Scalar>(v: &mut [T]) {
    let nv = norm(v);
    v.iter_mut().for_each(|x| *x = x.scale(1.0 / nv));
}
