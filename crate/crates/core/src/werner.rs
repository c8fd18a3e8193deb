//! Closed-form results for Werner states under one extension.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{permutation_matrix, Dense, HermitianOperator, SystemLayout};
use crate::states::{gamma_from_p, DensityOperator, TOL_PSD};

const SQRT3: f64 = 1.732_050_807_568_877_2;

/// `U⊗U⊗U`-invariant basis on three copies of `C^d` (layout `1:d 2:d 3:d`).
#[derive(Clone, Debug)]
pub struct ROperators {
    pub plus: HermitianOperator,
    pub minus: HermitianOperator,
    pub r0: HermitianOperator,
    pub r1: HermitianOperator,
    pub r2: HermitianOperator,
    pub r3: HermitianOperator,
}

/// Permutation operators `(V₁₂, V₁₃, V₂₃, V₁₂₃, V₃₂₁)` on three `d`-level systems.
pub fn triple_permutations(d: usize) -> Result<[Dense<f64>; 5]> {
    let l = triple_layout(d)?;
    Ok([
        permutation_matrix(&l, &[("1", "2"), ("2", "1")])?,
        permutation_matrix(&l, &[("1", "3"), ("3", "1")])?,
        permutation_matrix(&l, &[("2", "3"), ("3", "2")])?,
        permutation_matrix(&l, &[("1", "2"), ("2", "3"), ("3", "1")])?,
        permutation_matrix(&l, &[("3", "2"), ("2", "1"), ("1", "3")])?,
    ])
}

fn triple_layout(d: usize) -> Result<SystemLayout> {
    SystemLayout::new([("1", d), ("2", d), ("3", d)])
}

pub fn r_operators(d: usize) -> Result<ROperators> {
    if d < 2 {
        return Err(Error::InvalidParameter(format!("dimension {d} < 2")));
    }
    let l = triple_layout(d)?;
    let [v12, v13, v23, v123, v321] = triple_permutations(d)?;
    let id = Dense::<f64>::identity(d * d * d);
    let cycles = v123.add(&v321);
    let plus = id.add(&v12).add(&v13).add(&v23).add(&cycles).scaled(1.0 / 6.0);
    let minus = id.sub(&v12).sub(&v13).sub(&v23).add(&cycles).scaled(1.0 / 6.0);
    let r0 = id.sub(&plus).sub(&minus);
    let r1 = v23.scaled(2.0).sub(&v13).sub(&v12).scaled(1.0 / 3.0);
    let r2 = v12.sub(&v13).scaled(1.0 / SQRT3);
    let r3 = v123.sub(&v321).map(|x| Complex64::new(0.0, x / SQRT3));
    let real = |m: Dense<f64>| HermitianOperator::from_real(l.clone(), m);
    Ok(ROperators {
        plus: real(plus)?,
        minus: real(minus)?,
        r0: real(r0)?,
        r1: real(r1)?,
        r2: real(r2)?,
        r3: HermitianOperator::from_complex(l.clone(), r3)?,
    })
}

/// Expansion coefficients of `X₁ = ρ_AB⊗I_E`, `X₂ = ρ_AE⊗I_B` (unnormalized
/// `I + γV`) and `Y₁ = αI − Ψ⁻_ab`, `Y₂ = αI − Ψ⁻_ae` in the `R` basis.
///
/// Qubit components are indexed `0..=3`; tilded vectors belong to `X₂`/`Y₂`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IrrepCoefficients {
    pub s: [f64; 4],
    pub s_tilde: [f64; 4],
    pub t: [f64; 4],
    pub t_tilde: [f64; 4],
    pub s_plus: f64,
    pub s_minus: f64,
    pub t_plus: f64,
    pub t_minus: f64,
}

fn tilde(v: [f64; 4]) -> [f64; 4] {
    [v[0], v[1], -v[2], v[3]]
}

/// Coefficient table for the Werner/singlet operators.
pub fn st_coefficients(gamma: f64, alpha: f64) -> IrrepCoefficients {
    let s = [1.0, 0.5 * gamma, -0.5 * SQRT3 * gamma, 0.0];
    let t = [alpha - 0.5, -0.25, 0.25 * SQRT3, 0.0];
    IrrepCoefficients {
        s,
        s_tilde: tilde(s),
        t,
        t_tilde: tilde(t),
        s_plus: 1.0 + gamma,
        s_minus: 1.0 - gamma,
        t_plus: alpha,
        t_minus: 0.0,
    }
}

/// The same coefficients computed as `tr(X Rᵢ)/tr(Rᵢ† Rᵢ)` from dense operators.
///
/// Components of an empty irrep (zero-trace projector) are reported as 0.
pub fn st_coefficients_from_traces(d: usize, gamma: f64, alpha: f64) -> Result<IrrepCoefficients> {
    let rd = r_operators(d)?;
    let rq = r_operators(2)?;
    let [v12, v13, ..] = triple_permutations(d)?;
    let [q12, q13, ..] = triple_permutations(2)?;
    let lx = triple_layout(d)?;
    let lq = triple_layout(2)?;
    let mk = |l: &SystemLayout, v: &Dense<f64>, a: f64, b: f64| {
        let mut m = v.scaled(b);
        m.add_diagonal(a);
        HermitianOperator::from_real(l.clone(), m)
    };
    // Ψ⁻ = (I − V)/2 on qubits, so αI − Ψ⁻ = (α − ½)I + V/2.
    let x1 = mk(&lx, &v12, 1.0, gamma)?;
    let x2 = mk(&lx, &v13, 1.0, gamma)?;
    let y1 = mk(&lq, &q12, alpha - 0.5, 0.5)?;
    let y2 = mk(&lq, &q13, alpha - 0.5, 0.5)?;

    let coef = |x: &HermitianOperator, r: &HermitianOperator| -> Result<f64> {
        let norm = r.trace_product(r)?;
        if norm < 1e-9 {
            return Ok(0.0);
        }
        Ok(x.trace_product(r)? / norm)
    };
    let qubit = |x: &HermitianOperator, r: &ROperators| -> Result<[f64; 4]> {
        Ok([coef(x, &r.r0)?, coef(x, &r.r1)?, coef(x, &r.r2)?, coef(x, &r.r3)?])
    };
    Ok(IrrepCoefficients {
        s: qubit(&x1, &rd)?,
        s_tilde: qubit(&x2, &rd)?,
        t: qubit(&y1, &rq)?,
        t_tilde: qubit(&y2, &rq)?,
        s_plus: coef(&x1, &rd.plus)?,
        s_minus: coef(&x1, &rd.minus)?,
        t_plus: coef(&y1, &rq.plus)?,
        t_minus: coef(&y1, &rq.minus)?,
    })
}

/// `½(X₁^q⊗Y₁^q + X₂^q⊗Y₂^q)` with `σ₁ = σ_x`, `σ₂ = σ_y`; real for `s₃ = t₃ = 0`.
pub fn reduced_matrix(c: &IrrepCoefficients) -> HermitianOperator {
    let [s0, s1, s2, _] = c.s;
    let [t0, t1, t2, _] = c.t;
    let a = s0 * t0;
    let b = s0 * t1;
    let e = s1 * t0;
    let f = s1 * t1 - s2 * t2;
    let g = s2 * t2 + s1 * t1;
    let m = Dense::from_vec(
        4,
        vec![
            a, b, e, f, //
            b, a, g, e, //
            e, g, a, b, //
            f, e, b, a,
        ],
    );
    let layout = SystemLayout::new([("x", 2), ("y", 2)]).expect("distinct labels");
    HermitianOperator::from_real(layout, m).expect("symmetric by construction")
}

/// `[λ₁, λ₂, λ₃, λ₄]` of [`reduced_matrix`]; `λ₂ ≤ λ₁` and `λ₄ ≤ λ₃`.
pub fn reduced_eigenvalues(c: &IrrepCoefficients) -> [f64; 4] {
    let [s0, s1, s2, _] = c.s;
    let [t0, t1, t2, _] = c.t;
    let r12 = ((s2 * t2).powi(2) + (s0 * t1 - s1 * t0).powi(2)).sqrt();
    let r34 = ((s2 * t2).powi(2) + (s0 * t1 + s1 * t0).powi(2)).sqrt();
    let c12 = -s1 * t1 + s0 * t0;
    let c34 = s1 * t1 + s0 * t0;
    [c12 + r12, c12 - r12, c34 + r34, c34 - r34]
}

/// Single-copy one-extendible fidelity of `ρ_W(γ)`.
pub fn alpha_max_k1(gamma: f64) -> f64 {
    let g2 = gamma * gamma;
    0.5 + 0.5 * ((1.0 + 2.0 * g2) / (4.0 - g2)).sqrt()
}

/// Residual of `(16 − 4γ²)α² − (16 − 4γ²)α + (3 − 3γ²)`.
pub fn alpha_quadratic(gamma: f64, alpha: f64) -> f64 {
    let g2 = gamma * gamma;
    let a = 16.0 - 4.0 * g2;
    a * alpha * alpha - a * alpha + (3.0 - 3.0 * g2)
}

/// [`alpha_max_k1`] for `d = 4` in the symmetric-weight parametrization.
pub fn alpha_max_k1_d4_p(p: f64) -> f64 {
    0.5 + (0.25 - 15.0 * p * (1.0 - p) / (25.0 - 16.0 * p * p)).sqrt()
}

/// Largest fidelity achievable from the maximally mixed two-qubit state by
/// `k`-extendible maps, `½(k+2)/(k+1)`.
pub fn maxmixed_bound(k: usize) -> f64 {
    0.5 * (k as f64 + 2.0) / (k as f64 + 1.0)
}

pub fn mnp_f(p: f64, d: usize) -> f64 {
    let d = d as f64;
    let num = SQRT3 * (-2.0 * d * p + d + 1.0).abs();
    let den = ((2.0 * (d - 2.0) * p + d + 1.0) * (3.0 * (d + 1.0) - 2.0 * (d + 2.0) * p)).sqrt();
    num / den
}

/// Best measure-and-prepare fidelity over the cloning ellipse.
pub fn mnp_alpha_max(p: f64, d: usize) -> f64 {
    let f = mnp_f(p, d);
    0.25 * ((3.0 * f * f + 1.0).sqrt() + 2.0)
}

/// Consistency helper: [`alpha_max_k1`] in the `p` parametrization.
pub fn alpha_max_k1_p(p: f64, d: usize) -> f64 {
    alpha_max_k1(gamma_from_p(p, d))
}

/// A pair of output fidelities `(F₁, F₂)` of a three-qubit state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MnPTradeoff {
    pub f1: f64,
    pub f2: f64,
    pub y_plus: f64,
    pub y_minus: f64,
}

impl MnPTradeoff {
    pub fn from_fidelities(f1: f64, f2: f64) -> Self {
        Self {
            f1,
            f2,
            y_plus: (1.0 - f1 - f2) / 2.0,
            y_minus: (f1 - f2) / 2.0,
        }
    }

    pub fn from_y(y_plus: f64, y_minus: f64) -> Self {
        Self {
            f1: 0.5 - y_plus + y_minus,
            f2: 0.5 - y_plus - y_minus,
            y_plus,
            y_minus,
        }
    }

    /// Point of the ellipse boundary `y₊ = ¼cos θ`, `y₋ = (√3/4) sin θ`.
    pub fn on_ellipse(theta: f64) -> Self {
        Self::from_y(0.25 * theta.cos(), 0.25 * SQRT3 * theta.sin())
    }

    /// Membership in the convex hull of `(F₁, F₂) = (0, 0)` and the filled ellipse.
    pub fn is_feasible(&self) -> bool {
        const EPS: f64 = 1e-12;
        let g = |yp: f64, ym: f64| yp * yp + ym * ym / 3.0;
        if g(self.y_plus, self.y_minus) <= 1.0 / 16.0 + EPS {
            return true;
        }
        // The origin sits at y = (½, 0); look for an ellipse point e with
        // self = origin + t (e − origin), t ∈ (0, 1], i.e. e = origin + s u, s ≥ 1.
        let (up, um) = (self.y_plus - 0.5, self.y_minus);
        let a = up * up + um * um / 3.0;
        if a < EPS * EPS {
            return true;
        }
        let s = (-up / (2.0 * a)).max(1.0);
        g(0.5 + s * up, s * um) <= 1.0 / 16.0 + EPS
    }
}

/// `n` evenly spaced points on the ellipse boundary.
pub fn ellipse_boundary(n: usize) -> Vec<MnPTradeoff> {
    (0..n)
        .map(|i| MnPTradeoff::on_ellipse(2.0 * std::f64::consts::PI * i as f64 / n as f64))
        .collect()
}

/// `β_i = (α − F₁) s_i + (α − F₂) s̃_i` for the qubit block of `Z`.
pub fn beta_coefficients(c: &IrrepCoefficients, alpha: f64, t: &MnPTradeoff) -> [f64; 4] {
    let (a, b) = (alpha - t.f1, alpha - t.f2);
    std::array::from_fn(|i| a * c.s[i] + b * c.s_tilde[i])
}

/// Positivity of `Z` from its qubit block: `β₀ ≥ 0` and `Σβᵢ² ≤ β₀²`.
///
/// Since `s₀ = s̃₀` and `s_± = s̃_± ≥ 0`, the sign of `β₀` also settles the
/// scalar blocks.
pub fn beta_criterion(beta: &[f64; 4]) -> bool {
    let tail: f64 = beta[1..].iter().map(|b| b * b).sum();
    beta[0] >= 0.0 && tail <= beta[0] * beta[0]
}

/// [`beta_criterion`] with a relative slack for boundary cases.
pub fn beta_criterion_margin(beta: &[f64; 4]) -> f64 {
    let tail: f64 = beta[1..].iter().map(|b| b * b).sum::<f64>().sqrt();
    beta[0] - tail
}

/// `Z = (α − F₁) ρ_AB⊗I_E + (α − F₂) ρ_AE⊗I_B` on layout `A B E`.
pub fn mnp_operator(state: &DensityOperator, alpha: f64, t: &MnPTradeoff) -> Result<HermitianOperator> {
    let (x1, x2) = mnp_parts(state)?;
    x1.combine(alpha - t.f1, &x2, alpha - t.f2)
}

fn mnp_parts(state: &DensityOperator) -> Result<(HermitianOperator, HermitianOperator)> {
    let dims = state.layout().dims();
    if dims.len() != 2 {
        return Err(Error::DimensionMismatch(format!(
            "expected a bipartite state, got `{}`",
            state.layout()
        )));
    }
    let rho = state.op().relabel(["A", "B"])?;
    let e = HermitianOperator::identity(SystemLayout::new([("E", dims[1])])?);
    let x1 = rho.kron(&e)?;
    let x2 = x1.permute_subsystems(&[("B", "E"), ("E", "B")])?;
    Ok((x1, x2))
}

/// Options of [`mnp_threshold_numeric`].
#[derive(Clone, Copy, Debug)]
pub struct MnPScan {
    pub grid: usize,
    pub tol_eig: f64,
}

impl Default for MnPScan {
    fn default() -> Self {
        Self {
            grid: 720,
            tol_eig: 1e-9,
        }
    }
}

/// Measure-and-prepare threshold: the largest α for which some ellipse pair
/// `(F₁, F₂)` makes `Z` non-positive, found by bisection with tolerance `tol`.
pub fn mnp_threshold_numeric(state: &DensityOperator, tol: f64) -> Result<f64> {
    mnp_threshold_with(state, tol, MnPScan::default())
}

pub fn mnp_threshold_with(state: &DensityOperator, tol: f64, scan: MnPScan) -> Result<f64> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidParameter(format!("tolerance {tol} must be positive")));
    }
    let (x1, x2) = mnp_parts(state)?;
    let m1 = x1.matrix::<Complex64>();
    let m2 = x2.matrix::<Complex64>();
    let real = x1.is_real() && x2.is_real();
    let lmin = |alpha: f64, theta: f64| -> Result<f64> {
        let t = MnPTradeoff::on_ellipse(theta);
        let (a, b) = (alpha - t.f1, alpha - t.f2);
        if real {
            let m = Dense::from_fn(m1.dim(), |i, j| a * m1[(i, j)].re + b * m2[(i, j)].re);
            crate::linalg::eig_min_matrix(&m)
        } else {
            let m = Dense::from_fn(m1.dim(), |i, j| m1[(i, j)] * a + m2[(i, j)] * b);
            crate::linalg::eig_min_matrix(&m)
        }
    };
    let negative = |alpha: f64| -> Result<bool> {
        let step = 2.0 * std::f64::consts::PI / scan.grid as f64;
        let mut best = (f64::INFINITY, 0.0);
        for i in 0..scan.grid {
            let th = step * i as f64;
            let v = lmin(alpha, th)?;
            if v < -scan.tol_eig {
                return Ok(true);
            }
            if v < best.0 {
                best = (v, th);
            }
        }
        let v = golden_min(|th| lmin(alpha, th), best.1 - step, best.1 + step, tol.min(1e-6))?;
        Ok(v < -scan.tol_eig)
    };
    let (mut lo, mut hi) = (0.0, 1.0);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if negative(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

fn golden_min(mut f: impl FnMut(f64) -> Result<f64>, mut a: f64, mut b: f64, tol: f64) -> Result<f64> {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    let mut best = fc.min(fd);
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d)?;
        }
        best = best.min(fc).min(fd);
    }
    Ok(best)
}

/// Whether `state` is rank deficient, i.e. the threshold is only approached.
pub fn is_full_rank(state: &DensityOperator) -> Result<bool> {
    Ok(state.min_eigenvalue()? > TOL_PSD)
}
