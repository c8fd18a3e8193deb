use std::fmt::Debug;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use num_complex::Complex64;
use rand::Rng;

use super::dense::Dense;
use crate::error::{Error, Result};

/// Field of matrix entries: `f64` for the real fast path, `Complex64` otherwise.
pub trait Scalar:
    Copy
    + Send
    + Sync
    + Debug
    + PartialEq
    + Default
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
    + Sum
    + 'static
{
    const IS_REAL: bool;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_real(x: f64) -> Self;
    /// Drops the imaginary part when `Self` is real.
    fn from_c64(z: Complex64) -> Self;
    fn to_c64(self) -> Complex64;
    fn conj(self) -> Self;
    fn re(self) -> f64;
    fn im(self) -> f64;
    fn abs_sqr(self) -> f64;
    fn scale(self, x: f64) -> Self;
    fn random<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// Eigenvalues in ascending order, with eigenvectors as columns when requested.
    fn eigh(m: &Dense<Self>, vectors: bool) -> Result<(Vec<f64>, Option<Dense<Self>>)>;
}

impl Scalar for f64 {
    const IS_REAL: bool = true;

    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_real(x: f64) -> Self {
        x
    }
    fn from_c64(z: Complex64) -> Self {
        z.re
    }
    fn to_c64(self) -> Complex64 {
        Complex64::new(self, 0.0)
    }
    fn conj(self) -> Self {
        self
    }
    fn re(self) -> f64 {
        self
    }
    fn im(self) -> f64 {
        0.0
    }
    fn abs_sqr(self) -> f64 {
        self * self
    }
    fn scale(self, x: f64) -> Self {
        self * x
    }
    fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.random::<f64>() - 0.5
    }
    fn eigh(m: &Dense<Self>, vectors: bool) -> Result<(Vec<f64>, Option<Dense<Self>>)> {
        faer_eigh(m, vectors)
    }
}

impl Scalar for Complex64 {
    const IS_REAL: bool = false;

    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn from_real(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    fn from_c64(z: Complex64) -> Self {
        z
    }
    fn to_c64(self) -> Complex64 {
        self
    }
    fn conj(self) -> Self {
        Complex64::conj(&self)
    }
    fn re(self) -> f64 {
        self.re
    }
    fn im(self) -> f64 {
        self.im
    }
    fn abs_sqr(self) -> f64 {
        self.norm_sqr()
    }
    fn scale(self, x: f64) -> Self {
        self * x
    }
    fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
    }
    fn eigh(m: &Dense<Self>, vectors: bool) -> Result<(Vec<f64>, Option<Dense<Self>>)> {
        faer_eigh(m, vectors)
    }
}

fn faer_eigh<T>(m: &Dense<T>, vectors: bool) -> Result<(Vec<f64>, Option<Dense<T>>)>
where
    T: Scalar + faer::traits::ComplexField<Real = f64>,
{
    let n = m.dim();
    if n == 0 {
        return Ok((Vec::new(), vectors.then(|| Dense::zeros(0))));
    }
    let mat = faer::Mat::<T>::from_fn(n, n, |i, j| m[(i, j)]);
    if !vectors {
        let values = mat
            .self_adjoint_eigenvalues(faer::Side::Lower)
            .map_err(|_| Error::Eigensolver)?;
        return Ok((values, None));
    }
    let evd = mat
        .self_adjoint_eigen(faer::Side::Lower)
        .map_err(|_| Error::Eigensolver)?;
    let s = evd.S().column_vector();
    let u = evd.U();
    let values = (0..n).map(|i| Scalar::re(s[i])).collect();
    let vecs = Dense::from_fn(n, |i, j| u[(i, j)]);
    Ok((values, Some(vecs)))
}
