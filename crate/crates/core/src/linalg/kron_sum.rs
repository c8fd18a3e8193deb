use super::dense::Dense;
use super::layout::{gather_map, strides};
use super::scalar::Scalar;
use crate::error::{Error, Result};

/// A self-adjoint linear map available only through its action.
pub trait LinearMap<T: Scalar>: Sync {
    fn dim(&self) -> usize;

    /// Writes `H x` into `y`; both slices have length [`LinearMap::dim`].
    fn apply(&self, x: &[T], y: &mut [T]);
}

impl<T: Scalar> LinearMap<T> for Dense<T> {
    fn dim(&self) -> usize {
        Dense::dim(self)
    }

    fn apply(&self, x: &[T], y: &mut [T]) {
        self.matvec(x, y);
    }
}

/// Diagonal operator, mostly useful for tests and benchmarks.
#[derive(Clone, Debug)]
pub struct Diagonal(pub Vec<f64>);

impl<T: Scalar> LinearMap<T> for Diagonal {
    fn dim(&self) -> usize {
        self.0.len()
    }

    fn apply(&self, x: &[T], y: &mut [T]) {
        for ((yi, &xi), &d) in y.iter_mut().zip(x).zip(&self.0) {
            *yi = xi.scale(d);
        }
    }
}

/// A matrix acting on a subset of tensor axes.
#[derive(Clone, Debug)]
struct Factor<T> {
    axes: Vec<usize>,
    matrix: Dense<T>,
    /// Flat offset of each local index of `axes`.
    offsets: Vec<usize>,
    /// Flat index of every configuration of the remaining axes.
    bases: Vec<usize>,
}

impl<T: Scalar> Factor<T> {
    fn new(dims: &[usize], axes: Vec<usize>, matrix: Dense<T>) -> Self {
        let st = strides(dims);
        let local = |set: &[usize]| -> Vec<usize> {
            let mut out = vec![0usize];
            for &a in set {
                let mut next = Vec::with_capacity(out.len() * dims[a]);
                for &o in &out {
                    for x in 0..dims[a] {
                        next.push(o + x * st[a]);
                    }
                }
                out = next;
            }
            out
        };
        let rest: Vec<usize> = (0..dims.len()).filter(|a| !axes.contains(a)).collect();
        let offsets = local(&axes);
        let bases = local(&rest);
        Self {
            axes,
            matrix,
            offsets,
            bases,
        }
    }

    fn apply_in_place(&self, v: &mut [T], xin: &mut [T], xout: &mut [T]) {
        let k = self.offsets.len();
        for &b in &self.bases {
            for l in 0..k {
                xin[l] = v[b + self.offsets[l]];
            }
            self.matrix.matvec(&xin[..k], &mut xout[..k]);
            for l in 0..k {
                v[b + self.offsets[l]] = xout[l];
            }
        }
    }
}

/// `H = Σ_t ⊗_f M_{t,f}`, each factor acting on its own axes with identity
/// elsewhere.
///
/// Conjugating a product operator by a subsystem permutation only relabels
/// which axes each factor acts on, so sums of permuted products are stored
/// this way without ever forming the full matrix.
#[derive(Clone, Debug)]
pub struct KronSum<T> {
    dims: Vec<usize>,
    terms: Vec<Vec<Factor<T>>>,
}

impl<T: Scalar> KronSum<T> {
    pub fn new(dims: Vec<usize>) -> Self {
        Self {
            dims,
            terms: Vec::new(),
        }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Adds the product of `factors`, each a matrix with the axes it acts on.
    pub fn add_term(&mut self, factors: Vec<(Vec<usize>, Dense<T>)>) -> Result<()> {
        let mut used = vec![false; self.dims.len()];
        let mut term = Vec::with_capacity(factors.len());
        for (axes, m) in factors {
            let mut local = 1;
            for &a in &axes {
                if a >= self.dims.len() {
                    return Err(Error::DimensionMismatch(format!(
                        "axis {a} out of range for {} axes",
                        self.dims.len()
                    )));
                }
                if used[a] {
                    return Err(Error::InvalidParameter(format!(
                        "axis {a} is used by two factors of one term"
                    )));
                }
                used[a] = true;
                local *= self.dims[a];
            }
            if m.dim() != local {
                return Err(Error::DimensionMismatch(format!(
                    "factor of dimension {} on axes of total dimension {local}",
                    m.dim()
                )));
            }
            term.push(Factor::new(&self.dims, axes, m));
        }
        self.terms.push(term);
        Ok(())
    }

    /// Materializes the operator; intended for moderate dimensions.
    pub fn to_dense(&self) -> Dense<T> {
        let n = self.dim();
        let mut out = Dense::zeros(n);
        for term in &self.terms {
            // Kronecker product in the order the factors list their axes,
            // identity on the rest, then gathered back to the natural order.
            let mut order: Vec<usize> = term.iter().flat_map(|f| f.axes.iter().copied()).collect();
            let mut m = Dense::identity(1);
            for f in term {
                m = m.kron(&f.matrix);
            }
            let uncovered: Vec<usize> = (0..self.dims.len()).filter(|a| !order.contains(a)).collect();
            let rest: usize = uncovered.iter().map(|&a| self.dims[a]).product();
            order.extend(uncovered);
            m = m.kron(&Dense::identity(rest));
            let reordered: Vec<usize> = order.iter().map(|&a| self.dims[a]).collect();
            let mut inverse = vec![0; order.len()];
            for (p, &a) in order.iter().enumerate() {
                inverse[a] = p;
            }
            let map = gather_map(&reordered, &inverse);
            for r in 0..n {
                let mr = map[r];
                let src = m.row(mr);
                for c in 0..n {
                    out[(r, c)] += src[map[c]];
                }
            }
        }
        out
    }
}

impl<T: Scalar> LinearMap<T> for KronSum<T> {
    fn dim(&self) -> usize {
        self.dims.iter().product()
    }

    fn apply(&self, x: &[T], y: &mut [T]) {
        y.iter_mut().for_each(|v| *v = T::zero());
        let width = self.terms.iter().flatten().map(|f| f.offsets.len()).max().unwrap_or(0);
        let mut work = vec![T::zero(); x.len()];
        let mut xin = vec![T::zero(); width];
        let mut xout = vec![T::zero(); width];
        for term in &self.terms {
            work.copy_from_slice(x);
            for f in term {
                f.apply_in_place(&mut work, &mut xin, &mut xout);
            }
            for (yi, &w) in y.iter_mut().zip(&work) {
                *yi += w;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::dense::dot;
    use num_complex::Complex64;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_hermitian(n: usize, rng: &mut ChaCha8Rng) -> Dense<Complex64> {
        let a = Dense::from_fn(n, |_, _| Complex64::random(rng));
        a.add(&a.adjoint())
    }

    #[test]
    fn single_factor_matches_kron() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_hermitian(2, &mut rng);
        let b = random_hermitian(3, &mut rng);
        let mut ks = KronSum::new(vec![2, 3]);
        ks.add_term(vec![(vec![0], a.clone()), (vec![1], b.clone())]).unwrap();
        assert!(ks.to_dense().max_abs_diff(&a.kron(&b)) < 1e-14);
        // axis order inside the term must not matter
        let mut flipped = KronSum::new(vec![2, 3]);
        flipped
            .add_term(vec![(vec![1], b.clone()), (vec![0], a.clone())])
            .unwrap();
        assert!(flipped.to_dense().max_abs_diff(&a.kron(&b)) < 1e-14);
    }

    #[test]
    fn apply_matches_dense() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut ks = KronSum::new(vec![2, 3, 2]);
        ks.add_term(vec![(vec![2, 0], random_hermitian(4, &mut rng))]).unwrap();
        ks.add_term(vec![
            (vec![1], random_hermitian(3, &mut rng)),
            (vec![0], random_hermitian(2, &mut rng)),
        ])
        .unwrap();
        let dense = ks.to_dense();
        let x: Vec<Complex64> = (0..12).map(|_| Complex64::random(&mut rng)).collect();
        let mut y1 = vec![Complex64::default(); 12];
        let mut y2 = vec![Complex64::default(); 12];
        ks.apply(&x, &mut y1);
        dense.matvec(&x, &mut y2);
        for (a, b) in y1.iter().zip(&y2) {
            assert!((a - b).norm() < 1e-13);
        }
        let u: Vec<Complex64> = (0..12).map(|_| Complex64::random(&mut rng)).collect();
        let mut hu = vec![Complex64::default(); 12];
        ks.apply(&u, &mut hu);
        let lhs = dot(&u, &y1);
        let rhs = dot(&hu, &x);
        assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn rejects_overlapping_axes() {
        let mut ks = KronSum::<f64>::new(vec![2, 2]);
        let r = ks.add_term(vec![(vec![0], Dense::identity(2)), (vec![0], Dense::identity(2))]);
        assert!(matches!(r, Err(Error::InvalidParameter(_))));
        let r = ks.add_term(vec![(vec![0], Dense::identity(3))]);
        assert!(matches!(r, Err(Error::DimensionMismatch(_))));
    }
}
