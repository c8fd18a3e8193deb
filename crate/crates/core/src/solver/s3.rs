//! Symmetry-reduced probe for Werner states with one extension.
//!
//! Each triple `A_c B0_c B1_c` (and the output triple `a b0 b1`) splits into
//! the symmetric (`+`), antisymmetric (`−`) and two-dimensional (`q`) irreps
//! of `S3`. On a fixed label tuple the probe is
//! `Σ_{j=1,2} ⊗_c x_j^{(label_c)} ⊗ y_j^{(label_abe)}`, where `x^{(±)}` are the
//! scalars `s_±`, `y^{(+)} = t_+`, `t_− = 0`, and the `q` components are the
//! 2×2 matrices `Σ s_i R_i` in the real frame `R₁ → σ_x`, `R₂ → σ_z`.

use super::problem::{Backend, KExtProblem};
use crate::error::{Error, Result};
use crate::linalg::{Dense, Scalar};
use crate::werner::{st_coefficients, IrrepCoefficients};

fn qubit(c: &[f64; 4]) -> Dense<f64> {
    Dense::from_vec(2, vec![c[0] + c[2], c[1], c[1], c[0] - c[2]])
}

fn kron_power(m: &Dense<f64>, p: usize) -> Dense<f64> {
    (0..p).fold(Dense::identity(1), |acc, _| acc.kron(m))
}

/// Smallest eigenvalue of `Σ_j X_j^{⊗m} ⊗ Y_j` (`with_y`) or `t_+ Σ_j X_j^{⊗m}`.
fn base_block_min(c: &IrrepCoefficients, m: usize, with_y: bool) -> Result<f64> {
    let xs = [qubit(&c.s), qubit(&c.s_tilde)];
    let ys = [qubit(&c.t), qubit(&c.t_tilde)];
    let mut block = Dense::zeros(if with_y { 1 << (m + 1) } else { 1 << m });
    for j in 0..2 {
        let x = kron_power(&xs[j], m);
        let term = if with_y { x.kron(&ys[j]) } else { x.scaled(c.t_plus) };
        block.add_assign_scaled(&term, 1.0);
    }
    let (values, _) = f64::eigh(&block, false)?;
    Ok(values[0])
}

/// Unnormalized block minimum over all label tuples.
fn block_min(c: &IrrepCoefficients, n: usize, with_minus: bool) -> Result<f64> {
    let mut best = f64::INFINITY;
    for m in 0..=n {
        let scalars = n - m;
        // products s_+^a s_-^{scalars-a}; the multiset of labels is all that matters
        let coeffs: Vec<f64> = if with_minus {
            (0..=scalars)
                .map(|a| c.s_plus.powi(a as i32) * c.s_minus.powi((scalars - a) as i32))
                .collect()
        } else {
            vec![c.s_plus.powi(scalars as i32)]
        };
        for with_y in [true, false] {
            let base = base_block_min(c, m, with_y)?;
            for &k in &coeffs {
                best = best.min(k * base);
            }
        }
    }
    Ok(best)
}

/// λ_min of the one-extension probe for `n` copies of the qubit Werner state
/// `(I + γV)/(4 + 2γ)`, with the `Ψ⁻` target.
pub fn s3_block_lambda_min(gamma: f64, alpha: f64, n: usize) -> Result<f64> {
    s3_block_lambda_min_d(gamma, alpha, n, 2)
}

/// As [`s3_block_lambda_min`] for local dimension `d`; the `−` irrep of the
/// input triples is present only for `d ≥ 3`.
pub fn s3_block_lambda_min_d(gamma: f64, alpha: f64, n: usize, d: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidParameter("copies must be at least 1".into()));
    }
    if d < 2 || !(-1.0..=1.0).contains(&gamma) {
        return Err(Error::InvalidParameter(format!(
            "invalid Werner parameters d={d}, gamma={gamma}"
        )));
    }
    let c = st_coefficients(gamma, alpha);
    let norm = (d as f64 * (d as f64 + gamma)).powi(n as i32);
    Ok(block_min(&c, n, d >= 3)? / norm)
}

/// λ_min through the block backend for a problem that resolves to it.
pub(crate) fn problem_lambda_min(problem: &KExtProblem, alpha: f64) -> Result<f64> {
    debug_assert_eq!(problem.resolved_backend()?, Backend::S3Blocks);
    let w = problem
        .state()
        .werner()
        .ok_or_else(|| Error::InvalidParameter("s3_blocks requires a Werner state".into()))?;
    s3_block_lambda_min_d(w.gamma(), alpha, problem.copies(), w.d())
}
