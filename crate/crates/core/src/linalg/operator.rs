use num_complex::Complex64;

use super::dense::Dense;
use super::layout::{gather_map, strides, SystemLayout};
use super::scalar::Scalar;
use crate::error::{Error, Result};

/// Entrywise Hermiticity tolerance.
pub const TOL_HERM: f64 = 1e-12;
/// Largest imaginary part that still takes the real fast path.
pub const TOL_REAL: f64 = 1e-14;

#[derive(Clone, Debug, PartialEq)]
pub enum Entries {
    Real(Dense<f64>),
    Complex(Dense<Complex64>),
}

macro_rules! map_entries {
    ($e:expr, |$m:ident| $body:expr) => {
        match $e {
            Entries::Real($m) => Entries::Real($body),
            Entries::Complex($m) => Entries::Complex($body),
        }
    };
}

impl Entries {
    pub fn dim(&self) -> usize {
        match self {
            Entries::Real(m) => m.dim(),
            Entries::Complex(m) => m.dim(),
        }
    }

    fn to_complex(&self) -> Dense<Complex64> {
        match self {
            Entries::Real(m) => m.map(|v| v.to_c64()),
            Entries::Complex(m) => m.clone(),
        }
    }
}

/// Hermitian matrix paired with the tensor layout of its Hilbert space.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianOperator {
    layout: SystemLayout,
    entries: Entries,
}

impl HermitianOperator {
    pub fn from_real(layout: SystemLayout, m: Dense<f64>) -> Result<Self> {
        Self::checked(layout, Entries::Real(m))
    }

    /// Stores the matrix as real when every imaginary part is below [`TOL_REAL`].
    pub fn from_complex(layout: SystemLayout, m: Dense<Complex64>) -> Result<Self> {
        if m.max_imag() <= TOL_REAL {
            Self::checked(layout, Entries::Real(m.map(|v| v.re)))
        } else {
            Self::checked(layout, Entries::Complex(m))
        }
    }

    pub fn from_dense<T: Scalar>(layout: SystemLayout, m: Dense<T>) -> Result<Self> {
        if T::IS_REAL {
            Self::from_real(layout, m.map(|v| v.re()))
        } else {
            Self::from_complex(layout, m.map(|v| v.to_c64()))
        }
    }

    fn checked(layout: SystemLayout, entries: Entries) -> Result<Self> {
        if entries.dim() != layout.total_dim() {
            return Err(Error::DimensionMismatch(format!(
                "matrix is {n}x{n} but layout `{layout}` has dimension {}",
                layout.total_dim(),
                n = entries.dim()
            )));
        }
        let dev = match &entries {
            Entries::Real(m) => m.hermitian_deviation(),
            Entries::Complex(m) => m.hermitian_deviation(),
        };
        if dev > TOL_HERM {
            return Err(Error::NotHermitian(dev));
        }
        Ok(Self { layout, entries })
    }

    /// Skips validation; callers guarantee Hermiticity and matching dimension.
    pub(crate) fn from_parts(layout: SystemLayout, entries: Entries) -> Self {
        debug_assert_eq!(entries.dim(), layout.total_dim());
        Self { layout, entries }
    }

    pub fn identity(layout: SystemLayout) -> Self {
        let n = layout.total_dim();
        Self::from_parts(layout, Entries::Real(Dense::identity(n)))
    }

    pub fn layout(&self) -> &SystemLayout {
        &self.layout
    }

    pub fn dim(&self) -> usize {
        self.entries.dim()
    }

    pub fn is_real(&self) -> bool {
        matches!(self.entries, Entries::Real(_))
    }

    pub fn entries(&self) -> &Entries {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        match &self.entries {
            Entries::Real(m) => m[(i, j)].to_c64(),
            Entries::Complex(m) => m[(i, j)],
        }
    }

    pub fn to_complex_matrix(&self) -> Dense<Complex64> {
        self.entries.to_complex()
    }

    /// Entries in the field `T`; imaginary parts are dropped when `T` is real.
    pub fn matrix<T: Scalar>(&self) -> Dense<T> {
        match &self.entries {
            Entries::Real(m) => m.map(T::from_real),
            Entries::Complex(m) => m.map(T::from_c64),
        }
    }

    pub fn trace(&self) -> f64 {
        match &self.entries {
            Entries::Real(m) => m.trace(),
            Entries::Complex(m) => m.trace().re,
        }
    }

    /// `tr(self · other)`, real for Hermitian arguments.
    pub fn trace_product(&self, other: &Self) -> Result<f64> {
        self.same_dims(other)?;
        let n = self.dim();
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                acc += self.get(i, j) * other.get(j, i);
            }
        }
        Ok(acc.re)
    }

    pub fn scaled(&self, x: f64) -> Self {
        Self::from_parts(self.layout.clone(), map_entries!(&self.entries, |m| m.scaled(x)))
    }

    fn same_dims(&self, other: &Self) -> Result<()> {
        if self.layout.dims() != other.layout.dims() {
            return Err(Error::DimensionMismatch(format!(
                "`{}` vs `{}`",
                self.layout, other.layout
            )));
        }
        Ok(())
    }

    /// Linear combination `a·self + b·other` on a common layout.
    pub fn combine(&self, a: f64, other: &Self, b: f64) -> Result<Self> {
        self.same_dims(other)?;
        let entries = match (&self.entries, &other.entries) {
            (Entries::Real(x), Entries::Real(y)) => Entries::Real(x.scaled(a).add(&y.scaled(b))),
            _ => Entries::Complex(
                self.entries
                    .to_complex()
                    .scaled(a)
                    .add(&other.entries.to_complex().scaled(b)),
            ),
        };
        Ok(Self::from_parts(self.layout.clone(), entries))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.combine(1.0, other, 1.0)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.combine(1.0, other, -1.0)
    }

    /// Tensor product; the layout is the concatenation `self ⊗ other`.
    pub fn kron(&self, other: &Self) -> Result<Self> {
        let layout = self.layout.concat(&other.layout)?;
        let entries = match (&self.entries, &other.entries) {
            (Entries::Real(x), Entries::Real(y)) => Entries::Real(x.kron(y)),
            _ => Entries::Complex(self.entries.to_complex().kron(&other.entries.to_complex())),
        };
        Ok(Self::from_parts(layout, entries))
    }

    pub fn relabel<S: Into<String>>(&self, labels: impl IntoIterator<Item = S>) -> Result<Self> {
        Ok(Self::from_parts(self.layout.relabeled(labels)?, self.entries.clone()))
    }

    fn positions(&self, labels: &[&str]) -> Result<Vec<usize>> {
        labels.iter().map(|l| self.layout.position(l)).collect()
    }

    /// Same operator with the tensor factors listed in `order`.
    pub fn reorder(&self, order: &[&str]) -> Result<Self> {
        let pos = self.positions(order)?;
        if pos.len() != self.layout.len() {
            return Err(Error::DimensionMismatch(format!(
                "reorder needs all {} labels, got {}",
                self.layout.len(),
                pos.len()
            )));
        }
        let mut seen = pos.clone();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != pos.len() {
            return Err(Error::InvalidParameter("reorder lists a label twice".into()));
        }
        let map = gather_map(&self.layout.dims(), &pos);
        Ok(Self::from_parts(
            self.layout.reordered(&pos),
            map_entries!(&self.entries, |m| gather(m, &map)),
        ))
    }

    /// Conjugation `V H V†` by the subsystem permutation that moves the
    /// content of `from` into `to` for each listed pair; unlisted
    /// subsystems stay in place. The layout is unchanged.
    pub fn permute_subsystems(&self, moves: &[(&str, &str)]) -> Result<Self> {
        let inverse = permutation_inverse(&self.layout, moves)?;
        let map = gather_map(&self.layout.dims(), &inverse);
        Ok(Self::from_parts(
            self.layout.clone(),
            map_entries!(&self.entries, |m| gather(m, &map)),
        ))
    }

    /// Traces out every subsystem not in `keep`; kept factors retain their
    /// original relative order.
    pub fn partial_trace(&self, keep: &[&str]) -> Result<Self> {
        let mut kept = self.positions(keep)?;
        kept.sort_unstable();
        kept.dedup();
        let traced: Vec<usize> = (0..self.layout.len()).filter(|i| !kept.contains(i)).collect();
        let kept_dim: usize = kept.iter().map(|&i| self.layout.subsystems()[i].dim).product();
        let order: Vec<usize> = kept.iter().chain(&traced).copied().collect();
        let map = gather_map(&self.layout.dims(), &order);
        let entries = map_entries!(&self.entries, |m| trace_tail(m, &map, kept_dim));
        Ok(Self::from_parts(self.layout.reordered(&kept), entries))
    }

    /// Full transpose in the computational basis.
    pub fn transpose(&self) -> Self {
        Self::from_parts(self.layout.clone(), map_entries!(&self.entries, |m| m.transpose()))
    }

    pub fn partial_transpose(&self, label: &str) -> Result<Self> {
        let pos = self.layout.position(label)?;
        let dims = self.layout.dims();
        let stride = strides(&dims)[pos];
        let d = dims[pos];
        let entries = map_entries!(&self.entries, |m| {
            Dense::from_fn(m.dim(), |r, c| {
                let dr = (r / stride) % d;
                let dc = (c / stride) % d;
                let r2 = r - dr * stride + dc * stride;
                let c2 = c - dc * stride + dr * stride;
                m[(r2, c2)]
            })
        });
        Ok(Self::from_parts(self.layout.clone(), entries))
    }

    /// `U H U†` for a unitary (or any square) `U` of matching dimension.
    pub fn conjugate_by(&self, u: &Dense<Complex64>) -> Result<Self> {
        if u.dim() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "conjugating a {}-dim operator by a {}-dim matrix",
                self.dim(),
                u.dim()
            )));
        }
        let m = u.matmul(&self.to_complex_matrix()).matmul(&u.adjoint());
        // Round-off can break exact Hermiticity; restore it.
        let m = Dense::from_fn(m.dim(), |i, j| (m[(i, j)] + m[(j, i)].conj()) * 0.5);
        Self::from_complex(self.layout.clone(), m)
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let (vals, _) = match &self.entries {
            Entries::Real(m) => f64::eigh(m, false)?,
            Entries::Complex(m) => {
                let (v, _) = Complex64::eigh(m, false)?;
                (v, None)
            }
        };
        Ok(vals)
    }

    /// Smallest eigenvalue and a unit eigenvector for it.
    pub fn eig_min_with_vector(&self) -> Result<(f64, Vec<Complex64>)> {
        match &self.entries {
            Entries::Real(m) => {
                let (vals, vecs) = f64::eigh(m, true)?;
                let v = vecs.expect("requested").column(0);
                Ok((vals[0], v.into_iter().map(|x| x.to_c64()).collect()))
            }
            Entries::Complex(m) => {
                let (vals, vecs) = Complex64::eigh(m, true)?;
                Ok((vals[0], vecs.expect("requested").column(0)))
            }
        }
    }

    pub fn eig_min(&self) -> Result<f64> {
        eig_min_dense(self)
    }

    /// `<v|H|v>` for a vector in the computational basis.
    pub fn expectation(&self, v: &[Complex64]) -> f64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, vi) in v.iter().enumerate() {
            let row: Complex64 = v.iter().enumerate().map(|(j, vj)| self.get(i, j) * vj).sum();
            acc += vi.conj() * row;
        }
        acc.re
    }
}

/// Smallest eigenvalue of a dense Hermitian operator.
pub fn eig_min_dense(h: &HermitianOperator) -> Result<f64> {
    let vals = h.eigenvalues()?;
    vals.first().copied().ok_or(Error::Eigensolver)
}

/// Smallest eigenvalue of a raw matrix, rejecting non-Hermitian input.
pub fn eig_min_matrix<T: Scalar>(m: &Dense<T>) -> Result<f64> {
    let dev = m.hermitian_deviation();
    if dev > TOL_HERM {
        return Err(Error::NotHermitian(dev));
    }
    let (vals, _) = T::eigh(m, false)?;
    vals.first().copied().ok_or(Error::Eigensolver)
}

/// Permutation matrix exchanging subsystems `i` and `j`.
pub fn swap_op(layout: &SystemLayout, i: &str, j: &str) -> Result<HermitianOperator> {
    if i == j {
        layout.position(i)?;
        return Ok(HermitianOperator::identity(layout.clone()));
    }
    permutation_op(layout, &[(i, j), (j, i)])
}

/// Unitary `V` that moves the content of each `from` subsystem into `to`.
///
/// Symmetric only for involutions; general permutations are returned as a
/// plain matrix.
pub fn permutation_matrix(layout: &SystemLayout, moves: &[(&str, &str)]) -> Result<Dense<f64>> {
    let inverse = permutation_inverse(layout, moves)?;
    let map = gather_map(&layout.dims(), &inverse);
    let n = layout.total_dim();
    let mut v = Dense::zeros(n);
    for (t, &s) in map.iter().enumerate() {
        v[(t, s)] = 1.0;
    }
    Ok(v)
}

/// Permutation operator for an involution (e.g. a product of disjoint swaps).
pub fn permutation_op(layout: &SystemLayout, moves: &[(&str, &str)]) -> Result<HermitianOperator> {
    let v = permutation_matrix(layout, moves)?;
    HermitianOperator::from_real(layout.clone(), v)
}

/// Resolves label moves into the inverse permutation of positions, checking
/// bijectivity and equal dimensions.
fn permutation_inverse(layout: &SystemLayout, moves: &[(&str, &str)]) -> Result<Vec<usize>> {
    let n = layout.len();
    let mut forward: Vec<usize> = (0..n).collect();
    let mut assigned = vec![false; n];
    for &(from, to) in moves {
        let f = layout.position(from)?;
        let t = layout.position(to)?;
        if assigned[f] {
            return Err(Error::InvalidParameter(format!("`{from}` is moved twice")));
        }
        assigned[f] = true;
        let (df, dt) = (layout.subsystems()[f].dim, layout.subsystems()[t].dim);
        if df != dt {
            return Err(Error::DimensionMismatch(format!(
                "cannot move `{from}` (dim {df}) into `{to}` (dim {dt})"
            )));
        }
        forward[f] = t;
    }
    let mut inverse = vec![usize::MAX; n];
    for (i, &t) in forward.iter().enumerate() {
        if inverse[t] != usize::MAX {
            return Err(Error::InvalidParameter(
                "subsystem moves do not form a permutation".into(),
            ));
        }
        inverse[t] = i;
    }
    Ok(inverse)
}

fn gather<T: Scalar>(m: &Dense<T>, map: &[usize]) -> Dense<T> {
    Dense::from_fn(m.dim(), |r, c| m[(map[r], map[c])])
}

fn trace_tail<T: Scalar>(m: &Dense<T>, map: &[usize], kept: usize) -> Dense<T> {
    let traced = m.dim() / kept;
    Dense::from_fn(kept, |i, j| {
        (0..traced).map(|t| m[(map[i * traced + t], map[j * traced + t])]).sum()
    })
}
