use std::ops::{Index, IndexMut};

use super::scalar::Scalar;

/// Square matrix stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Dense<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Scalar> Dense<T> {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![T::zero(); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Self { n, data }
    }

    /// Panics unless `data.len() == n * n`.
    pub fn from_vec(n: usize, data: Vec<T>) -> Self {
        assert_eq!(data.len(), n * n, "expected {n}x{n} entries");
        Self { n, data }
    }

    pub fn diagonal(values: &[T]) -> Self {
        let mut m = Self::zeros(values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    /// The rank-one projector `|v><v|` (not normalized).
    pub fn outer(v: &[T]) -> Self {
        Self::from_fn(v.len(), |i, j| v[i] * v[j].conj())
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.n, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.n, |i, j| self[(j, i)])
    }

    pub fn trace(&self) -> T {
        (0..self.n).map(|i| self[(i, i)]).sum()
    }

    pub fn scaled(&self, x: f64) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().map(|v| v.scale(x)).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        Self {
            n: self.n,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        Self {
            n: self.n,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| a - b).collect(),
        }
    }

    pub fn add_assign_scaled(&mut self, other: &Self, x: f64) {
        assert_eq!(self.n, other.n);
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a += b.scale(x);
        }
    }

    pub fn add_diagonal(&mut self, x: f64) {
        for i in 0..self.n {
            self[(i, i)] += T::from_real(x);
        }
    }

    pub fn matmul(&self, other: &Self) -> Self {
        let n = self.n;
        assert_eq!(n, other.n);
        let mut out = Self::zeros(n);
        for i in 0..n {
            for l in 0..n {
                let a = self[(i, l)];
                if a == T::zero() {
                    continue;
                }
                let orow = other.row(l);
                let dst = &mut out.data[i * n..(i + 1) * n];
                for (d, &b) in dst.iter_mut().zip(orow) {
                    *d += a * b;
                }
            }
        }
        out
    }

    pub fn matvec(&self, x: &[T], y: &mut [T]) {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = self.row(i).iter().zip(x).map(|(&a, &b)| a * b).sum();
        }
    }

    /// Kronecker product, `self` as the more significant factor.
    pub fn kron(&self, other: &Self) -> Self {
        let (n, m) = (self.n, other.n);
        let mut out = Self::zeros(n * m);
        let nm = n * m;
        for i1 in 0..n {
            for j1 in 0..n {
                let a = self[(i1, j1)];
                if a == T::zero() {
                    continue;
                }
                for i2 in 0..m {
                    let base = (i1 * m + i2) * nm + j1 * m;
                    for j2 in 0..m {
                        out.data[base + j2] = a * other[(i2, j2)];
                    }
                }
            }
        }
        out
    }

    /// `max |A_ij - conj(A_ji)|`.
    pub fn hermitian_deviation(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.n {
            for j in i..self.n {
                let d = (self[(i, j)] - self[(j, i)].conj()).abs_sqr().sqrt();
                worst = worst.max(d);
            }
        }
        worst
    }

    pub fn max_imag(&self) -> f64 {
        self.data.iter().fold(0.0, |acc, v| acc.max(v.im().abs()))
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.n, other.n);
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |acc, (&a, &b)| acc.max((a - b).abs_sqr().sqrt()))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v.abs_sqr()).sum::<f64>().sqrt()
    }

    /// Entrywise conversion to a different field.
    pub fn map<U: Scalar>(&self, f: impl Fn(T) -> U) -> Dense<U> {
        Dense {
            n: self.n,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.n).map(|i| self[(i, j)]).collect()
    }
}

impl<T> Index<(usize, usize)> for Dense<T> {
    type Output = T;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.n + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Dense<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.n + j]
    }
}

/// Hermitian inner product `<x, y>` (conjugate-linear in `x`).
pub fn dot<T: Scalar>(x: &[T], y: &[T]) -> T {
    x.iter().zip(y).map(|(&a, &b)| a.conj() * b).sum()
}

pub fn norm<T: Scalar>(x: &[T]) -> f64 {
    x.iter().map(|v| v.abs_sqr()).sum::<f64>().sqrt()
}
