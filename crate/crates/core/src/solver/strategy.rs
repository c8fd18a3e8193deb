//! Measure-and-prepare maps reaching fidelity one on rank-deficient states.
//!
//! Every construction has the shape `σ_in = X_A ⊗ Y_{B0} ⊗ τ_{B1..Bk}` (or an
//! entangled `τ` across `A B1..Bk`) with `σ_out = Φ⁺_{a b0} ⊗ (I/2)^{⊗k}`.
//! When each term `i ≥ 1` has zero weight on `ρ`, only the `Φ⁺` branch
//! survives and the output is exactly `Φ⁺`.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::cj::{cj_of_mnp, CJOperator};
use super::problem::Side;
use crate::error::{Error, Result};
use crate::linalg::{permutation_matrix, Dense, HermitianOperator, Scalar, SystemLayout};
use crate::states::{bell_projector, BellKind, DensityOperator, TOL_PSD};

/// A vector counts as in the kernel when `⟨v|ρ|v⟩ ≤ TOL_KERNEL`.
pub const TOL_KERNEL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Construction {
    /// A product vector `|a⟩|b⟩` annihilated by `ρ`.
    ProductKernel,
    /// Any kernel vector, one extension only.
    KernelState,
    /// The antisymmetric subspace of `A B1..Bk` lies in the kernel.
    AntisymmetricKernel,
    /// An extension supplied by the caller.
    SuppliedExtension,
}

#[derive(Clone, Debug)]
pub struct F1Strategy {
    pub cj: CJOperator,
    pub side: Side,
    pub construction: Construction,
    /// `tr Λ(ρ)`, the probability weight of the successful branch.
    pub success_weight: f64,
}

/// Finds a strategy with fidelity one for `k` extensions, or `None` when
/// `state` is full rank or no supported construction applies.
pub fn construct_f1_strategy(state: &DensityOperator, k: usize) -> Result<Option<F1Strategy>> {
    check_inputs(state, k)?;
    if state.is_full_rank()? {
        return Ok(None);
    }
    let rho = state.op().relabel(["A", "B"])?;
    let swapped = rho.reorder(&["B", "A"])?.relabel(["A", "B"])?;

    if let Some(s) = product_strategy(&rho, &swapped, k)? {
        return Ok(Some(s));
    }
    for (side, r) in [(Side::Bob, &rho), (Side::Alice, &swapped)] {
        if let Some(sigma_in) = antisymmetric_extension(r, k)? {
            if let Some(s) = finish(r, sigma_in, k, side, Construction::AntisymmetricKernel)? {
                return Ok(Some(s));
            }
        }
    }
    if k == 1 {
        for (side, r) in [(Side::Bob, &rho), (Side::Alice, &swapped)] {
            for psi in kernel_vectors(r)? {
                let layout = SystemLayout::new([("A", dims(r).0), ("B1", dims(r).1)])?;
                let tau =
                    HermitianOperator::from_complex(layout, Dense::from_fn(psi.len(), |i, j| psi[i] * psi[j].conj()))?;
                let sigma_in = with_mixed_b0(&tau, dims(r).1, 1)?;
                if let Some(s) = finish(r, sigma_in, k, side, Construction::KernelState)? {
                    return Ok(Some(s));
                }
            }
        }
    }
    Ok(None)
}

/// Strategy from a caller-supplied extension `τ` on `A B1..Bk`, extended on
/// `side`. Each `τ_{A B_i}` must be orthogonal to `ρ`, and the branch `i = 0`
/// (`τ_A ⊗ I/d_B`) must have positive weight.
pub fn construct_f1_strategy_with(
    state: &DensityOperator,
    extension: &HermitianOperator,
    side: Side,
) -> Result<Option<F1Strategy>> {
    let k = extension
        .layout()
        .len()
        .checked_sub(1)
        .filter(|&k| k >= 1)
        .ok_or_else(|| Error::DimensionMismatch("extension needs layout A B1..Bk".into()))?;
    check_inputs(state, k)?;
    let mut rho = state.op().relabel(["A", "B"])?;
    if side == Side::Alice {
        rho = rho.reorder(&["B", "A"])?.relabel(["A", "B"])?;
    }
    let (da, db) = dims(&rho);
    let ext_dims = extension.layout().dims();
    if ext_dims[0] != da || ext_dims[1..].iter().any(|&d| d != db) {
        return Err(Error::DimensionMismatch(format!(
            "extension layout `{}` does not fit a {da}x{db} state",
            extension.layout()
        )));
    }
    let labels: Vec<String> = std::iter::once("A".to_string())
        .chain((1..=k).map(|i| format!("B{i}")))
        .collect();
    let tau = extension.relabel(labels)?;
    let sigma_in = with_mixed_b0(&tau, db, k)?;
    finish(&rho, sigma_in, k, side, Construction::SuppliedExtension)
}

fn check_inputs(state: &DensityOperator, k: usize) -> Result<()> {
    if state.layout().len() != 2 {
        return Err(Error::DimensionMismatch(format!(
            "expected a bipartite state, got `{}`",
            state.layout()
        )));
    }
    if k == 0 {
        return Err(Error::InvalidParameter("extensions must be at least 1".into()));
    }
    Ok(())
}

fn dims(rho: &HermitianOperator) -> (usize, usize) {
    let d = rho.layout().dims();
    (d[0], d[1])
}

/// `σ_out = Φ⁺_{a b0} ⊗ (I/2)^{⊗k}`.
fn output_state(k: usize) -> Result<HermitianOperator> {
    let mut out = HermitianOperator::from_real(
        SystemLayout::new([("a", 2), ("b0", 2)])?,
        bell_projector(BellKind::PhiPlus, 2)?,
    )?;
    for i in 1..=k {
        let mixed = HermitianOperator::identity(SystemLayout::new([(format!("b{i}"), 2)])?).scaled(0.5);
        out = out.kron(&mixed)?;
    }
    Ok(out)
}

/// Inserts `I/d_B` on `B0`: `τ_{A B1..Bk} → τ ⊗ I/d_B` ordered `A B0 B1..Bk`.
fn with_mixed_b0(tau: &HermitianOperator, db: usize, k: usize) -> Result<HermitianOperator> {
    let mixed = HermitianOperator::identity(SystemLayout::new([("B0", db)])?).scaled(1.0 / db as f64);
    let order: Vec<String> = ["A", "B0"]
        .into_iter()
        .map(String::from)
        .chain((1..=k).map(|i| format!("B{i}")))
        .collect();
    let order: Vec<&str> = order.iter().map(String::as_str).collect();
    tau.kron(&mixed)?.reorder(&order)
}

/// Builds the CJ operator and checks that it is a valid fidelity-one strategy.
fn finish(
    rho: &HermitianOperator,
    sigma_in: HermitianOperator,
    k: usize,
    side: Side,
    construction: Construction,
) -> Result<Option<F1Strategy>> {
    let labels = sigma_in.layout().labels();
    for i in 1..=k {
        let m = sigma_in
            .partial_trace(&[labels[0], labels[i + 1]])?
            .relabel(["A", "B"])?;
        if rho.trace_product(&m)?.abs() > TOL_KERNEL {
            return Ok(None);
        }
    }
    let m0 = sigma_in.partial_trace(&[labels[0], labels[1]])?.relabel(["A", "B"])?;
    let weight = rho.trace_product(&m0)?;
    if weight <= TOL_KERNEL {
        return Ok(None);
    }
    let (da, db) = dims(rho);
    let mut cj = cj_of_mnp(&sigma_in, &output_state(k)?)?.into_op();
    if side == Side::Alice {
        cj = cj.relabel(["B'", "A'", "b", "a"])?.reorder(&["A'", "B'", "a", "b"])?;
    }
    let cj = CJOperator::new(cj)?;
    Ok(Some(F1Strategy {
        cj,
        side,
        construction,
        success_weight: weight * (da * db) as f64,
    }))
}

fn product_strategy(rho: &HermitianOperator, swapped: &HermitianOperator, k: usize) -> Result<Option<F1Strategy>> {
    let Some((a, b)) = find_product_kernel_vector(rho)? else {
        return Ok(None);
    };
    let db = dims(rho).1;
    let pa = projector("A", &a)?;
    let rho_a = rho.partial_trace(&["A"])?;
    let weight_a = rho_a.expectation(&a);
    if weight_a > TOL_KERNEL {
        // X = |a⟩⟨a| on A, I/d_B on B0, |b⟩⟨b| on every B_i
        let mut sigma =
            pa.kron(&HermitianOperator::identity(SystemLayout::new([("B0", db)])?).scaled(1.0 / db as f64))?;
        for i in 1..=k {
            sigma = sigma.kron(&projector(&format!("B{i}"), &b)?)?;
        }
        if let Some(s) = finish(rho, sigma, k, Side::Bob, Construction::ProductKernel)? {
            return Ok(Some(s));
        }
    }
    // |a⟩⟨a| ⊗ I lies in the kernel: extend Alice with I/d_B on her partner,
    // the top eigenvector of ρ_A on her kept copy, |a⟩ on the extensions.
    let (_, top) = rho_a.scaled(-1.0).eig_min_with_vector()?;
    let mut sigma = HermitianOperator::identity(SystemLayout::new([("A", db)])?)
        .scaled(1.0 / db as f64)
        .kron(&projector("B0", &top)?)?;
    for i in 1..=k {
        sigma = sigma.kron(&projector(&format!("B{i}"), &a)?)?;
    }
    finish(swapped, sigma, k, Side::Alice, Construction::ProductKernel)
}

fn projector(label: &str, v: &[Complex64]) -> Result<HermitianOperator> {
    let n: f64 = v.iter().map(|z| z.norm_sqr()).sum();
    let m = Dense::from_fn(v.len(), |i, j| v[i] * v[j].conj() / n);
    HermitianOperator::from_complex(SystemLayout::new([(label, v.len())])?, m)
}

/// Orthonormal basis of the numerical kernel of `ρ`.
fn kernel_vectors(rho: &HermitianOperator) -> Result<Vec<Vec<Complex64>>> {
    let m = rho.to_complex_matrix();
    let (values, vectors) = Complex64::eigh(&m, true)?;
    let vectors = vectors.expect("vectors requested");
    Ok(values
        .iter()
        .enumerate()
        .take_while(|(_, &v)| v <= TOL_PSD)
        .map(|(j, _)| vectors.column(j))
        .collect())
}

/// `⟨a⊗b|ρ|a⊗b⟩`.
fn product_value(rho: &Dense<Complex64>, a: &[Complex64], b: &[Complex64]) -> f64 {
    let v: Vec<Complex64> = a.iter().flat_map(|&x| b.iter().map(move |&y| x * y)).collect();
    let mut w = vec![Complex64::default(); v.len()];
    rho.matvec(&v, &mut w);
    v.iter().zip(&w).map(|(x, y)| (x.conj() * y).re).sum()
}

/// `R[i][i'] = Σ_{jj'} conj(b_j) ρ[(i,j),(i',j')] b_{j'}` (or the same with
/// the roles of the parties exchanged).
fn reduced(rho: &Dense<Complex64>, da: usize, db: usize, v: &[Complex64], on_a: bool) -> Dense<Complex64> {
    if on_a {
        Dense::from_fn(da, |i, ip| {
            let mut acc = Complex64::default();
            for j in 0..db {
                for jp in 0..db {
                    acc += v[j].conj() * rho[(i * db + j, ip * db + jp)] * v[jp];
                }
            }
            acc
        })
    } else {
        Dense::from_fn(db, |j, jp| {
            let mut acc = Complex64::default();
            for i in 0..da {
                for ip in 0..da {
                    acc += v[i].conj() * rho[(i * db + j, ip * db + jp)] * v[ip];
                }
            }
            acc
        })
    }
}

fn lowest_vector(m: &Dense<Complex64>) -> Result<Vec<Complex64>> {
    let (_, vectors) = Complex64::eigh(m, true)?;
    Ok(vectors.expect("vectors requested").column(0))
}

/// A product vector `|a⟩|b⟩` with `⟨ab|ρ|ab⟩ ≤ TOL_KERNEL`, preferring one
/// whose `|a⟩` carries weight in `ρ_A`.
///
/// Computational basis products are checked first; otherwise alternating
/// minimization from seeded random starts.
pub fn find_product_kernel_vector(rho: &HermitianOperator) -> Result<Option<(Vec<Complex64>, Vec<Complex64>)>> {
    let (da, db) = dims(rho);
    let m = rho.to_complex_matrix();
    let rho_a = rho.partial_trace(&[rho.layout().labels()[0]])?;
    let basis = |d: usize, i: usize| -> Vec<Complex64> {
        (0..d)
            .map(|j| Complex64::new(if i == j { 1.0 } else { 0.0 }, 0.0))
            .collect()
    };
    let mut best: Option<(f64, Vec<Complex64>, Vec<Complex64>)> = None;
    let consider = |a: Vec<Complex64>, b: Vec<Complex64>, best: &mut Option<(f64, Vec<Complex64>, Vec<Complex64>)>| {
        if product_value(&m, &a, &b) <= TOL_KERNEL {
            let w = rho_a.expectation(&a);
            if best.as_ref().is_none_or(|(bw, _, _)| w > *bw) {
                *best = Some((w, a, b));
            }
        }
    };
    for i in 0..da {
        for j in 0..db {
            consider(basis(da, i), basis(db, j), &mut best);
        }
    }
    if best.as_ref().is_some_and(|(w, _, _)| *w > TOL_KERNEL) {
        return Ok(best.map(|(_, a, b)| (a, b)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x7072_6f64);
    for _ in 0..32 {
        let mut b: Vec<Complex64> = (0..db).map(|_| Complex64::random(&mut rng)).collect();
        let mut a = lowest_vector(&reduced(&m, da, db, &b, true))?;
        for _ in 0..200 {
            b = lowest_vector(&reduced(&m, da, db, &a, false))?;
            a = lowest_vector(&reduced(&m, da, db, &b, true))?;
            if product_value(&m, &a, &b) <= 1e-3 * TOL_KERNEL {
                break;
            }
        }
        let nb = b.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let b: Vec<Complex64> = b.iter().map(|z| z / nb).collect();
        consider(a, b, &mut best);
        if best.as_ref().is_some_and(|(w, _, _)| *w > TOL_KERNEL) {
            break;
        }
    }
    Ok(best.map(|(_, a, b)| (a, b)))
}

/// `P_as/tr P_as` on `A B1..Bk` tensored with `I/d` on `B0`, when `d ≥ k+1`
/// and the two-party antisymmetric subspace is annihilated by `ρ`.
fn antisymmetric_extension(rho: &HermitianOperator, k: usize) -> Result<Option<HermitianOperator>> {
    let (da, db) = dims(rho);
    if da != db || da < k + 1 {
        return Ok(None);
    }
    let d = da;
    let v = crate::states::swap_matrix(d);
    let mut p_as = v.scaled(-0.5);
    p_as.add_diagonal(0.5);
    let p_as = HermitianOperator::from_real(rho.layout().clone(), p_as)?;
    if rho.trace_product(&p_as)? > TOL_KERNEL {
        return Ok(None);
    }
    let labels: Vec<String> = std::iter::once("A".to_string())
        .chain((1..=k).map(|i| format!("B{i}")))
        .collect();
    let layout = SystemLayout::new(labels.iter().map(|l| (l.as_str(), d)))?;
    let n = k + 1;
    let mut proj = Dense::<f64>::zeros(layout.total_dim());
    for perm in permutations(n) {
        let sign = permutation_sign(&perm);
        let moves: Vec<(&str, &str)> = (0..n).map(|i| (labels[i].as_str(), labels[perm[i]].as_str())).collect();
        proj.add_assign_scaled(&permutation_matrix(&layout, &moves)?, sign);
    }
    let tr = proj.trace();
    let tau = HermitianOperator::from_real(layout, proj.scaled(1.0 / tr))?;
    Ok(Some(with_mixed_b0(&tau, d, k)?))
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..n {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

fn permutation_sign(p: &[usize]) -> f64 {
    let mut inversions = 0;
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            if p[i] > p[j] {
                inversions += 1;
            }
        }
    }
    if inversions % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}
