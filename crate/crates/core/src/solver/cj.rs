use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{Dense, HermitianOperator, SystemLayout};
use crate::states::{bell_projector, BellKind, DensityOperator, TOL_PSD};

/// Output traces below this (relative to `tr σ`) count as a singular output.
pub const TOL_SINGULAR: f64 = 1e-14;

/// Choi–Jamiołkowski operator of a map, on the layout `A′ B′ a b`.
#[derive(Clone, Debug)]
pub struct CJOperator {
    op: HermitianOperator,
}

impl CJOperator {
    /// Validates the four-party layout and positivity; the trace is free.
    pub fn new(op: HermitianOperator) -> Result<Self> {
        if op.layout().len() != 4 {
            return Err(Error::DimensionMismatch(format!(
                "CJ operator needs layout A' B' a b, got `{}`",
                op.layout()
            )));
        }
        let min = op.eig_min()?;
        if min < -TOL_PSD * op.trace().abs().max(1.0) {
            return Err(Error::NotPositive(min));
        }
        Ok(Self { op })
    }

    pub fn op(&self) -> &HermitianOperator {
        &self.op
    }

    pub fn into_op(self) -> HermitianOperator {
        self.op
    }

    pub fn input_dims(&self) -> (usize, usize) {
        let d = self.op.layout().dims();
        (d[0], d[1])
    }

    pub fn output_dims(&self) -> (usize, usize) {
        let d = self.op.layout().dims();
        (d[2], d[3])
    }

    /// CJ operator `Φ⁺_{A′a} ⊗ Φ⁺_{B′b}` of the identity channel.
    pub fn identity_channel(d_a: usize, d_b: usize) -> Result<Self> {
        let pa = phi_plus("A'", "a", d_a)?;
        let pb = phi_plus("B'", "b", d_b)?;
        Self::new(pa.kron(&pb)?.reorder(&["A'", "B'", "a", "b"])?)
    }

    /// Discards the input and prepares `out`: `I/d_A ⊗ I/d_B ⊗ out`.
    pub fn discard_and_prepare(d_a: usize, d_b: usize, out: &DensityOperator) -> Result<Self> {
        if out.layout().len() != 2 {
            return Err(Error::DimensionMismatch("prepared state must be bipartite".into()));
        }
        let input = SystemLayout::new([("A'", d_a), ("B'", d_b)])?;
        let mixed = HermitianOperator::identity(input).scaled(1.0 / (d_a * d_b) as f64);
        Self::new(mixed.kron(&out.op().relabel(["a", "b"])?)?)
    }

    /// `Λ(ρ) = d_A d_B tr_{A′B′}(σ (ρ^T ⊗ I))`, on the layout `a b`.
    pub fn apply(&self, rho: &HermitianOperator) -> Result<HermitianOperator> {
        let (da, db) = self.input_dims();
        let (oa, ob) = self.output_dims();
        if rho.dim() != da * db {
            return Err(Error::DimensionMismatch(format!(
                "state of dimension {} for a map on {da}x{db}",
                rho.dim()
            )));
        }
        let din = da * db;
        let dout = oa * ob;
        let sigma = self.op.to_complex_matrix();
        let r = rho.to_complex_matrix();
        let scale = din as f64;
        let out = Dense::from_fn(dout, |x, y| {
            let mut acc = Complex64::default();
            for i in 0..din {
                for j in 0..din {
                    acc += sigma[(i * dout + x, j * dout + y)] * r[(i, j)];
                }
            }
            acc * scale
        });
        let labels = self.op.layout().labels();
        let layout = SystemLayout::new([(labels[2], oa), (labels[3], ob)])?;
        HermitianOperator::from_complex(layout, out)
    }
}

fn phi_plus(x: &str, y: &str, d: usize) -> Result<HermitianOperator> {
    HermitianOperator::from_real(
        SystemLayout::new([(x, d), (y, d)])?,
        bell_projector(BellKind::PhiPlus, d)?,
    )
}

/// `F(ρ, Λ) = tr(Λ(ρ) Φ⁺)/tr Λ(ρ)`.
pub fn evaluate_map_fidelity(cj: &CJOperator, state: &DensityOperator) -> Result<f64> {
    let out = cj.apply(state.op())?;
    let (oa, ob) = cj.output_dims();
    if oa != ob {
        return Err(Error::DimensionMismatch(format!(
            "output {oa}x{ob} has no maximally entangled target"
        )));
    }
    let tr = out.trace();
    if tr <= TOL_SINGULAR * cj.op().trace().abs().max(1.0) {
        return Err(Error::SingularOutput);
    }
    let target = HermitianOperator::from_real(out.layout().clone(), bell_projector(BellKind::PhiPlus, oa)?)?;
    Ok(out.trace_product(&target)? / tr)
}

/// CJ operator of the measure-and-prepare map built from an extended input
/// state on `A B0..Bk` and an extended output state on `a b0..bk`:
/// `Σ_i (σ_in^T)_{A B_i} ⊗ (σ_out)_{a b_i}`.
pub fn cj_of_mnp(sigma_in: &HermitianOperator, sigma_out: &HermitianOperator) -> Result<CJOperator> {
    let lin = sigma_in.layout();
    let lout = sigma_out.layout();
    if lin.len() < 3 || lin.len() != lout.len() {
        return Err(Error::DimensionMismatch(format!(
            "layouts `{lin}` and `{lout}` are not A B0..Bk and a b0..bk for one k"
        )));
    }
    let din = lin.dims();
    let dout = lout.dims();
    if din[1..].iter().any(|&d| d != din[1]) || dout[1..].iter().any(|&d| d != dout[1]) {
        return Err(Error::DimensionMismatch(
            "extension systems must match the extended party".into(),
        ));
    }
    let li = lin.labels();
    let lo = lout.labels();
    let mut total: Option<HermitianOperator> = None;
    for i in 1..li.len() {
        let input = sigma_in
            .partial_trace(&[li[0], li[i]])?
            .transpose()
            .relabel(["A'", "B'"])?;
        let output = sigma_out.partial_trace(&[lo[0], lo[i]])?.relabel(["a", "b"])?;
        let term = input.kron(&output)?;
        total = Some(match total {
            None => term,
            Some(t) => t.add(&term)?,
        });
    }
    CJOperator::new(total.expect("at least one extension slot"))
}

/// `Σ_i tr(ρ σ_{A B_i}) σ_{a b_i}`: the measure-and-prepare action evaluated
/// directly from the marginals.
pub fn mnp_action(
    sigma_in: &HermitianOperator,
    sigma_out: &HermitianOperator,
    rho: &HermitianOperator,
) -> Result<HermitianOperator> {
    let li = sigma_in.layout().labels();
    let lo = sigma_out.layout().labels();
    if li.len() != lo.len() || li.len() < 3 {
        return Err(Error::DimensionMismatch("mismatched extension counts".into()));
    }
    let rho_l = rho.relabel(["A", "B"])?;
    let mut total: Option<HermitianOperator> = None;
    for i in 1..li.len() {
        let m = sigma_in.partial_trace(&[li[0], li[i]])?.relabel(["A", "B"])?;
        let w = rho_l.trace_product(&m)?;
        let out = sigma_out.partial_trace(&[lo[0], lo[i]])?.relabel(["a", "b"])?.scaled(w);
        total = Some(match total {
            None => out,
            Some(t) => t.add(&out)?,
        });
    }
    Ok(total.expect("at least one extension slot"))
}
