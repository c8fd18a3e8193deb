use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{Dense, HermitianOperator, SystemLayout};

/// Smallest eigenvalue tolerated in a density operator.
pub const TOL_PSD: f64 = 1e-10;
/// Trace deviation accepted as already normalized.
pub const TOL_TRACE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BellKind {
    PhiPlus,
    /// Singlet; qubits only.
    PsiMinus,
}

/// Werner parameters, stored in the `I + γV` form.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WernerParams {
    d: usize,
    gamma: f64,
}

impl WernerParams {
    pub fn from_gamma(d: usize, gamma: f64) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidParameter(format!("Werner dimension {d} < 2")));
        }
        if !(-1.0..=1.0).contains(&gamma) {
            return Err(Error::InvalidParameter(format!("gamma = {gamma} outside [-1, 1]")));
        }
        Ok(Self { d, gamma })
    }

    /// Weight `p` on the normalized symmetric projector.
    pub fn from_p(d: usize, p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidParameter(format!("p = {p} outside [0, 1]")));
        }
        if d < 2 {
            return Err(Error::InvalidParameter(format!("Werner dimension {d} < 2")));
        }
        Self::from_gamma(d, gamma_from_p(p, d).clamp(-1.0, 1.0))
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn p(&self) -> f64 {
        p_from_gamma(self.gamma, self.d)
    }

    /// Separable, equivalently PPT, iff `γ ≥ −1/d`.
    pub fn is_ppt(&self) -> bool {
        self.gamma >= -1.0 / self.d as f64
    }
}

pub fn gamma_from_p(p: f64, d: usize) -> f64 {
    let d = d as f64;
    -(2.0 * d * p - d - 1.0) / (2.0 * p - d - 1.0)
}

pub fn p_from_gamma(gamma: f64, d: usize) -> f64 {
    let d = d as f64;
    (d + 1.0) * (1.0 + gamma) / (2.0 * (d + gamma))
}

/// Hermitian PSD operator with unit trace (unless built unnormalized).
#[derive(Clone, Debug, PartialEq)]
pub struct DensityOperator {
    op: HermitianOperator,
    normalized: bool,
    werner: Option<WernerParams>,
}

impl DensityOperator {
    /// Validates positivity and rescales to unit trace.
    pub fn new(op: HermitianOperator) -> Result<Self> {
        Self::validated(op, true)
    }

    /// Validates positivity and keeps the trace as given.
    pub fn unnormalized(op: HermitianOperator) -> Result<Self> {
        Self::validated(op, false)
    }

    fn validated(op: HermitianOperator, normalize: bool) -> Result<Self> {
        let min = op.eig_min()?;
        if min < -TOL_PSD {
            return Err(Error::NotPositive(min));
        }
        let tr = op.trace();
        if tr <= TOL_PSD {
            return Err(Error::InvalidParameter(format!("density operator has trace {tr:e}")));
        }
        let close = (tr - 1.0).abs() <= TOL_TRACE;
        let op = if normalize && !close { op.scaled(1.0 / tr) } else { op };
        Ok(Self {
            op,
            normalized: normalize || close,
            werner: None,
        })
    }

    pub fn op(&self) -> &HermitianOperator {
        &self.op
    }

    pub fn into_op(self) -> HermitianOperator {
        self.op
    }

    pub fn layout(&self) -> &SystemLayout {
        self.op.layout()
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// Present when the state was built by [`werner`].
    pub fn werner(&self) -> Option<WernerParams> {
        self.werner
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        self.op.eig_min()
    }

    pub fn is_full_rank(&self) -> Result<bool> {
        Ok(self.min_eigenvalue()? > TOL_PSD)
    }

    pub fn kron(&self, other: &Self) -> Result<Self> {
        Ok(Self {
            op: self.op.kron(&other.op)?,
            normalized: self.normalized && other.normalized,
            werner: None,
        })
    }

    pub fn relabel<S: Into<String>>(&self, labels: impl IntoIterator<Item = S>) -> Result<Self> {
        Ok(Self {
            op: self.op.relabel(labels)?,
            ..self.clone()
        })
    }

    /// Exchanges the two parties of a bipartite state (`ρ_AB → ρ_BA`).
    pub fn swap_parties(&self) -> Result<Self> {
        let labels = self.layout().labels();
        if labels.len() != 2 {
            return Err(Error::DimensionMismatch(format!(
                "expected a bipartite layout, got `{}`",
                self.layout()
            )));
        }
        let op = self.op.reorder(&[labels[1], labels[0]])?;
        Ok(Self { op, ..self.clone() })
    }

    /// Reduced state on the listed subsystems.
    pub fn marginal(&self, keep: &[&str]) -> Result<Self> {
        Ok(Self {
            op: self.op.partial_trace(keep)?,
            normalized: self.normalized,
            werner: None,
        })
    }
}

/// `V|ij⟩ = |ji⟩` on `d ⊗ d`.
pub fn swap_matrix(d: usize) -> Dense<f64> {
    let mut v = Dense::zeros(d * d);
    for i in 0..d {
        for j in 0..d {
            v[(i * d + j, j * d + i)] = 1.0;
        }
    }
    v
}

/// Werner state `(I + γV)/(d² + γd)` on `A:d B:d`.
pub fn werner(params: WernerParams) -> DensityOperator {
    let d = params.d;
    let g = params.gamma;
    let norm = (d * d) as f64 + g * d as f64;
    let mut m = swap_matrix(d).scaled(g);
    m.add_diagonal(1.0);
    let op = HermitianOperator::from_real(SystemLayout::bipartite(d, d), m.scaled(1.0 / norm))
        .expect("Werner matrix is symmetric");
    DensityOperator {
        op,
        normalized: true,
        werner: Some(params),
    }
}

/// Unit vector of a Bell state in the computational basis.
pub fn bell_vector(kind: BellKind, d: usize) -> Result<Vec<f64>> {
    match kind {
        BellKind::PhiPlus => {
            if d < 2 {
                return Err(Error::InvalidParameter(format!("Bell dimension {d} < 2")));
            }
            let mut v = vec![0.0; d * d];
            let amp = 1.0 / (d as f64).sqrt();
            for i in 0..d {
                v[i * d + i] = amp;
            }
            Ok(v)
        }
        BellKind::PsiMinus => {
            if d != 2 {
                return Err(Error::InvalidParameter(format!(
                    "psi_minus is defined for qubits only, got d = {d}"
                )));
            }
            let a = std::f64::consts::FRAC_1_SQRT_2;
            Ok(vec![0.0, a, -a, 0.0])
        }
    }
}

pub fn bell_projector(kind: BellKind, d: usize) -> Result<Dense<f64>> {
    Ok(Dense::outer(&bell_vector(kind, d)?))
}

pub fn bell_state(kind: BellKind, d: usize) -> Result<DensityOperator> {
    let op = HermitianOperator::from_real(SystemLayout::bipartite(d, d), bell_projector(kind, d)?)?;
    Ok(DensityOperator {
        op,
        normalized: true,
        werner: None,
    })
}

/// Symmetric and antisymmetric projectors `(I ± V)/2` on `d ⊗ d`.
pub fn projectors(d: usize) -> (HermitianOperator, HermitianOperator) {
    let v = swap_matrix(d);
    let id = Dense::identity(d * d);
    let layout = SystemLayout::bipartite(d, d);
    let ps = HermitianOperator::from_real(layout.clone(), id.add(&v).scaled(0.5)).expect("symmetric");
    let pa = HermitianOperator::from_real(layout, id.sub(&v).scaled(0.5)).expect("symmetric");
    (ps, pa)
}

/// `αI − P_bell` on two qubits, layout `a:2 b:2`.
pub fn probe_matrix(alpha: f64, kind: BellKind) -> Dense<f64> {
    let mut m = bell_projector(kind, 2).expect("qubit Bell state").scaled(-1.0);
    m.add_diagonal(alpha);
    m
}

pub fn probe_operator(alpha: f64, kind: BellKind) -> HermitianOperator {
    let layout = SystemLayout::new([("a", 2), ("b", 2)]).expect("distinct labels");
    HermitianOperator::from_real(layout, probe_matrix(alpha, kind)).expect("symmetric")
}

/// `I/(d_A d_B)` on `A:d_A B:d_B`.
pub fn maximally_mixed(d_a: usize, d_b: usize) -> DensityOperator {
    let n = d_a * d_b;
    let op = HermitianOperator::from_real(
        SystemLayout::bipartite(d_a, d_b),
        Dense::identity(n).scaled(1.0 / n as f64),
    )
    .expect("identity");
    DensityOperator {
        op,
        normalized: true,
        werner: None,
    }
}

/// `|ψ⟩⟨ψ|/⟨ψ|ψ⟩` on the given layout.
pub fn pure_state(layout: SystemLayout, psi: &[Complex64]) -> Result<DensityOperator> {
    if psi.len() != layout.total_dim() {
        return Err(Error::DimensionMismatch(format!(
            "vector of length {} for layout `{layout}`",
            psi.len()
        )));
    }
    DensityOperator::new(HermitianOperator::from_complex(layout, Dense::outer(psi))?)
}

/// Computational basis state `|i⟩⟨i|` on a single system of dimension `d`.
pub fn basis_state(label: &str, d: usize, i: usize) -> Result<DensityOperator> {
    if i >= d {
        return Err(Error::InvalidParameter(format!("basis index {i} >= {d}")));
    }
    let mut diag = vec![0.0; d];
    diag[i] = 1.0;
    let op = HermitianOperator::from_real(SystemLayout::new([(label, d)])?, Dense::diagonal(&diag))?;
    Ok(DensityOperator {
        op,
        normalized: true,
        werner: None,
    })
}
