use num_complex::Complex64;

use super::problem::{Backend, KExtProblem, Side};
use crate::error::Result;
use crate::linalg::{Dense, HermitianOperator, KronSum, LinearMap, Scalar, SystemLayout};
use crate::states::{bell_projector, BellKind, DensityOperator};

/// Axis positions of the probe operator.
///
/// Order: `A_1..A_n, B0_1..B0_n, a, b0`, then `Bi_1..Bi_n, bi` for each
/// extension `i = 1..k`. Copy `c` of the state lives on `(A_c, B0_c)`.
#[derive(Clone, Debug)]
pub(crate) struct ProbeAxes {
    pub n: usize,
    pub k: usize,
    pub d_a: usize,
    pub d_b: usize,
}

impl ProbeAxes {
    pub fn from_problem(p: &KExtProblem) -> Self {
        let (d_a, d_b) = p.party_dims();
        Self {
            n: p.copies(),
            k: p.extensions(),
            d_a,
            d_b,
        }
    }

    pub fn a(&self, c: usize) -> usize {
        c
    }

    pub fn b(&self, i: usize, c: usize) -> usize {
        if i == 0 {
            self.n + c
        } else {
            2 * self.n + 2 + (i - 1) * (self.n + 1) + c
        }
    }

    pub fn out_a(&self) -> usize {
        2 * self.n
    }

    pub fn out_b(&self, i: usize) -> usize {
        if i == 0 {
            2 * self.n + 1
        } else {
            2 * self.n + 2 + (i - 1) * (self.n + 1) + self.n
        }
    }

    pub fn len(&self) -> usize {
        (self.n + 1) * (self.k + 2)
    }

    pub fn dims(&self) -> Vec<usize> {
        let mut dims = vec![0; self.len()];
        for c in 0..self.n {
            dims[self.a(c)] = self.d_a;
            for i in 0..=self.k {
                dims[self.b(i, c)] = self.d_b;
            }
        }
        dims[self.out_a()] = 2;
        for i in 0..=self.k {
            dims[self.out_b(i)] = 2;
        }
        dims
    }

    pub fn layout(&self) -> SystemLayout {
        let mut labels = vec![String::new(); self.len()];
        let suffix = |c: usize| {
            if self.n == 1 {
                String::new()
            } else {
                format!("_{}", c + 1)
            }
        };
        for c in 0..self.n {
            labels[self.a(c)] = format!("A{}", suffix(c));
            for i in 0..=self.k {
                labels[self.b(i, c)] = format!("B{i}{}", suffix(c));
            }
        }
        labels[self.out_a()] = "a".into();
        for i in 0..=self.k {
            labels[self.out_b(i)] = format!("b{i}");
        }
        SystemLayout::new(labels.into_iter().zip(self.dims())).expect("distinct labels")
    }

    /// `Σ_i V_i (ρ^T)^{⊗n} ⊗ m_{a b0} ⊗ I V_i` as a sum of Kronecker terms.
    pub fn kron_sum<T: Scalar>(&self, rho_t: &Dense<T>, m: &Dense<T>) -> KronSum<T> {
        let mut ks = KronSum::new(self.dims());
        for i in 0..=self.k {
            let mut factors: Vec<(Vec<usize>, Dense<T>)> = (0..self.n)
                .map(|c| (vec![self.a(c), self.b(i, c)], rho_t.clone()))
                .collect();
            factors.push((vec![self.out_a(), self.out_b(i)], m.clone()));
            ks.add_term(factors).expect("axes are disjoint by construction");
        }
        ks
    }
}

/// The state as seen by the solver: parties swapped when Alice is extended.
pub(crate) fn oriented_state(p: &KExtProblem) -> Result<DensityOperator> {
    match p.side() {
        Side::Bob => Ok(p.state().clone()),
        Side::Alice => p.state().swap_parties(),
    }
}

/// `αI − P_bell` in the field `T`.
pub(crate) fn probe_factor<T: Scalar>(alpha: f64, bell: BellKind) -> Dense<T> {
    let mut m = bell_projector(bell, 2)
        .expect("qubit Bell state")
        .scaled(-1.0)
        .map(T::from_real);
    m.add_diagonal(alpha);
    m
}

/// Matrix-free probe in either field.
#[derive(Clone, Debug)]
pub enum ProbeMap {
    Real(KronSum<f64>),
    Complex(KronSum<Complex64>),
}

impl ProbeMap {
    pub fn dim(&self) -> usize {
        match self {
            ProbeMap::Real(k) => LinearMap::<f64>::dim(k),
            ProbeMap::Complex(k) => LinearMap::<Complex64>::dim(k),
        }
    }

    pub fn to_operator(&self, layout: SystemLayout) -> Result<HermitianOperator> {
        match self {
            ProbeMap::Real(k) => HermitianOperator::from_real(layout, k.to_dense()),
            ProbeMap::Complex(k) => HermitianOperator::from_complex(layout, k.to_dense()),
        }
    }
}

#[derive(Clone, Debug)]
pub enum Probe {
    Dense(HermitianOperator),
    MatrixFree { layout: SystemLayout, map: ProbeMap },
}

impl Probe {
    pub fn layout(&self) -> &SystemLayout {
        match self {
            Probe::Dense(h) => h.layout(),
            Probe::MatrixFree { layout, .. } => layout,
        }
    }

    /// Dense form; materializes a matrix-free probe.
    pub fn into_operator(self) -> Result<HermitianOperator> {
        match self {
            Probe::Dense(h) => Ok(h),
            Probe::MatrixFree { layout, map } => map.to_operator(layout),
        }
    }
}

/// `Ŝ_k((ρ^{⊗n})^T ⊗ (αI − P_bell) ⊗ I)`, dense when the resolved backend is
/// dense and matrix-free otherwise.
pub fn build_probe(problem: &KExtProblem, alpha: f64) -> Result<Probe> {
    let backend = problem.resolved_backend()?;
    let axes = ProbeAxes::from_problem(problem);
    let rho = oriented_state(problem)?;
    let layout = axes.layout();
    let map = if rho.op().is_real() {
        let rho_t = rho.op().matrix::<f64>().transpose();
        ProbeMap::Real(axes.kron_sum(&rho_t, &probe_factor(alpha, problem.bell())))
    } else {
        let rho_t = rho.op().matrix::<Complex64>().transpose();
        ProbeMap::Complex(axes.kron_sum(&rho_t, &probe_factor(alpha, problem.bell())))
    };
    match backend {
        Backend::Dense => Ok(Probe::Dense(map.to_operator(layout)?)),
        _ => Ok(Probe::MatrixFree { layout, map }),
    }
}

/// `Ŝ_k(X) = Σ_{i=0..k} V_i X V_i`, where `V_i` swaps the pair `base` with
/// `extensions[i-1]` and `V_0 = I`.
pub fn symmetrize(x: &HermitianOperator, base: (&str, &str), extensions: &[(&str, &str)]) -> Result<HermitianOperator> {
    let mut out = x.clone();
    for &(e1, e2) in extensions {
        let moves = [(base.0, e1), (e1, base.0), (base.1, e2), (e2, base.1)];
        out = out.add(&x.permute_subsystems(&moves)?)?;
    }
    Ok(out)
}
