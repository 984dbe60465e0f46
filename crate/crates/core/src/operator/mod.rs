//! Dense complex operators on a truncated Hilbert space.
//!
//! Storage is always dense and row-major. Products skip exact zeros, which
//! keeps the permutation and block-diagonal operators that dominate this
//! crate cheap without a separate sparse type.

mod quadrature;
pub(crate) mod schatten;
mod spectrum;

pub use quadrature::inverse_sqrt_by_integral;
pub use schatten::{fit_decay, schatten_norm, schatten_sum, singular_values, weak_schatten_stat, DecayFit};
pub use spectrum::{apply_scalar_function, eigh, psd_order_leq, PsdWitness, SpectrumDecomposition};

use crate::error::{Error, Result};
use num_complex::Complex64;
use std::ops::Deref;

/// Default tolerance on `max |A - A*|` accepted by [`HermitianOperator::new`].
pub const HERMITICITY_TOL: f64 = 1e-9;

/// Relative cutoff below which eigenvalues and singular values count as zero.
pub const ZERO_THRESHOLD: f64 = 1e-10;

pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub(crate) const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Clone, Debug, PartialEq)]
pub struct DenseOperator {
    dim: usize,
    data: Vec<Complex64>,
}

impl DenseOperator {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![ZERO; dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut op = Self::zeros(dim);
        for i in 0..dim {
            op.data[i * dim + i] = ONE;
        }
        op
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                data.push(f(i, j));
            }
        }
        Self { dim, data }
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut op = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            op.data[i * diag.len() + i] = Complex64::new(d, 0.0);
        }
        op
    }

    /// Builds an operator from row-major data, rejecting NaN and infinities.
    pub fn from_row_major(dim: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch { expected: dim * dim, found: data.len() });
        }
        let op = Self { dim, data };
        op.check_finite()?;
        Ok(op)
    }

    pub fn check_finite(&self) -> Result<()> {
        match self.data.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            Some(k) => Err(Error::NonFinite { row: k / self.dim, col: k % self.dim }),
            None => Ok(()),
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.dim + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: Complex64) {
        self.data[i * self.dim + j] = value;
    }

    #[inline]
    pub(crate) fn add_at(&mut self, i: usize, j: usize, value: Complex64) {
        self.data[i * self.dim + j] += value;
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn diagonal(&self) -> Vec<Complex64> {
        (0..self.dim).map(|i| self.get(i, i)).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self.get(j, i).conj())
    }

    fn same_dim(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: other.dim });
        }
        Ok(())
    }

    /// Nonzero entries of each row as `(column, value)` pairs.
    pub(crate) fn sparse_rows(&self) -> Vec<Vec<(usize, Complex64)>> {
        (0..self.dim)
            .map(|i| {
                self.row(i)
                    .iter()
                    .enumerate()
                    .filter(|(_, z)| **z != ZERO)
                    .map(|(j, z)| (j, *z))
                    .collect()
            })
            .collect()
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        self.same_dim(other)?;
        let n = self.dim;
        let rhs = other.sparse_rows();
        let mut out = Self::zeros(n);
        for i in 0..n {
            let out_row = &mut out.data[i * n..(i + 1) * n];
            for (k, &a) in self.data[i * n..(i + 1) * n].iter().enumerate() {
                if a == ZERO {
                    continue;
                }
                for &(j, b) in &rhs[k] {
                    out_row[j] += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_dim(other)?;
        Ok(Self { dim: self.dim, data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect() })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.same_dim(other)?;
        Ok(Self { dim: self.dim, data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect() })
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|z| z * s).collect() }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|z| z * s).collect() }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    /// Largest singular value.
    pub fn operator_norm(&self) -> Result<f64> {
        Ok(singular_values(self)?.first().copied().unwrap_or(0.0))
    }

    /// `max |A - A*|` over all entries.
    pub fn asymmetry(&self) -> f64 {
        let n = self.dim;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        worst
    }

    /// Zeroes every row and column whose index is not flagged in `keep`.
    pub fn compress(&self, keep: &[bool]) -> Result<Self> {
        if keep.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: keep.len() });
        }
        Ok(Self::from_fn(self.dim, |i, j| if keep[i] && keep[j] { self.get(i, j) } else { ZERO }))
    }
}

/// `AB - BA`.
pub fn commutator(a: &DenseOperator, b: &DenseOperator) -> Result<DenseOperator> {
    a.matmul(b)?.sub(&b.matmul(a)?)
}

/// A dense operator known to be self-adjoint.
///
/// Construction symmetrizes the input to `(A + A*)/2` and remembers the
/// asymmetry that was removed.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianOperator {
    inner: DenseOperator,
    asymmetry: f64,
}

impl HermitianOperator {
    pub fn new(op: DenseOperator) -> Result<Self> {
        Self::with_tolerance(op, HERMITICITY_TOL)
    }

    /// Accepts `op` when `max |A - A*| <= tol·max(1, max|A|)`.
    pub fn with_tolerance(op: DenseOperator, tol: f64) -> Result<Self> {
        op.check_finite()?;
        let asymmetry = op.asymmetry();
        let bound = tol * op.max_abs().max(1.0);
        if asymmetry > bound {
            return Err(Error::NotHermitian { asymmetry, tolerance: bound });
        }
        Ok(Self::symmetrize(op))
    }

    /// Symmetrizes without any tolerance check.
    pub fn symmetrize(op: DenseOperator) -> Self {
        let asymmetry = op.asymmetry();
        let n = op.dim;
        let mut out = op;
        for i in 0..n {
            let d = out.get(i, i);
            out.set(i, i, Complex64::new(d.re, 0.0));
            for j in (i + 1)..n {
                let avg = (out.get(i, j) + out.get(j, i).conj()) * 0.5;
                out.set(i, j, avg);
                out.set(j, i, avg.conj());
            }
        }
        Self { inner: out, asymmetry }
    }

    pub fn zeros(dim: usize) -> Self {
        Self { inner: DenseOperator::zeros(dim), asymmetry: 0.0 }
    }

    pub fn identity(dim: usize) -> Self {
        Self { inner: DenseOperator::identity(dim), asymmetry: 0.0 }
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        Self { inner: DenseOperator::from_diagonal(diag), asymmetry: 0.0 }
    }

    /// Asymmetry removed at construction.
    pub fn removed_asymmetry(&self) -> f64 {
        self.asymmetry
    }

    pub fn as_dense(&self) -> &DenseOperator {
        &self.inner
    }

    pub fn into_dense(self) -> DenseOperator {
        self.inner
    }

    pub fn real_diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.get(i, i).re).collect()
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        Ok(Self::symmetrize(self.inner.add(&other.inner)?))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        Ok(Self::symmetrize(self.inner.sub(&other.inner)?))
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { inner: self.inner.scale_real(s), asymmetry: self.asymmetry * s.abs() }
    }

    /// `U A U*`.
    pub fn conjugate_by(&self, u: &DenseOperator) -> Result<Self> {
        Ok(Self::symmetrize(u.matmul(&self.inner)?.matmul(&u.adjoint())?))
    }

    pub fn compress(&self, keep: &[bool]) -> Result<Self> {
        Ok(Self { inner: self.inner.compress(keep)?, asymmetry: self.asymmetry })
    }
}

impl Deref for HermitianOperator {
    type Target = DenseOperator;

    fn deref(&self) -> &DenseOperator {
        &self.inner
    }
}
