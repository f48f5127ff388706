//! Matrix-free operator abstraction.
//!
//! The solvers only ever touch the system matrix through [`LinearOperator::apply_into`].

use std::sync::atomic::{AtomicUsize, Ordering};

use crate::error::{Error, Result};
use crate::sparse::vector::DenseVector;

/// A linear map `x ↦ Ax` with `A` of shape `nrows × ncols`.
pub trait LinearOperator {
    fn nrows(&self) -> usize;
    fn ncols(&self) -> usize;

    /// Writes `A·x` into `y`. Callers guarantee `x.len() == ncols` and `y.len() == nrows`.
    fn apply_into(&self, x: &[f64], y: &mut [f64]);

    /// Dimension of a square operator.
    fn dimension(&self) -> usize {
        self.ncols()
    }

    fn is_square(&self) -> bool {
        self.nrows() == self.ncols()
    }
}

/// Operators that can also apply their transpose.
pub trait TransposeOperator: LinearOperator {
    /// Writes `Aᵀ·x` into `y`. Callers guarantee `x.len() == nrows` and `y.len() == ncols`.
    fn apply_transpose_into(&self, x: &[f64], y: &mut [f64]);
}

impl<T: LinearOperator + ?Sized> LinearOperator for &T {
    fn nrows(&self) -> usize {
        (**self).nrows()
    }
    fn ncols(&self) -> usize {
        (**self).ncols()
    }
    fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        (**self).apply_into(x, y)
    }
}

impl<T: TransposeOperator + ?Sized> TransposeOperator for &T {
    fn apply_transpose_into(&self, x: &[f64], y: &mut [f64]) {
        (**self).apply_transpose_into(x, y)
    }
}

impl<T: LinearOperator + ?Sized> LinearOperator for Box<T> {
    fn nrows(&self) -> usize {
        (**self).nrows()
    }
    fn ncols(&self) -> usize {
        (**self).ncols()
    }
    fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        (**self).apply_into(x, y)
    }
}

/// Checked `A·v`.
pub fn matvec<A: LinearOperator + ?Sized>(a: &A, v: &DenseVector) -> Result<DenseVector> {
    if v.len() != a.ncols() {
        return Err(Error::DimensionMismatch {
            context: "matvec",
            expected: a.ncols(),
            found: v.len(),
        });
    }
    let mut out = vec![0.0; a.nrows()];
    a.apply_into(v, &mut out);
    DenseVector::new(out)
}

/// Checked `Aᵀ·v`.
pub fn matvec_transpose<A: TransposeOperator + ?Sized>(a: &A, v: &DenseVector) -> Result<DenseVector> {
    if v.len() != a.nrows() {
        return Err(Error::DimensionMismatch {
            context: "matvec_transpose",
            expected: a.nrows(),
            found: v.len(),
        });
    }
    let mut out = vec![0.0; a.ncols()];
    a.apply_transpose_into(v, &mut out);
    DenseVector::new(out)
}

/// `v ↦ Aᵀ(Av)`, evaluated with two products and never materialized.
#[derive(Clone, Copy, Debug)]
pub struct NormalOperator<A> {
    inner: A,
}

impl<A: TransposeOperator> NormalOperator<A> {
    pub fn new(inner: A) -> Self {
        Self { inner }
    }

    pub fn inner(&self) -> &A {
        &self.inner
    }
}

impl<A: TransposeOperator> LinearOperator for NormalOperator<A> {
    fn nrows(&self) -> usize {
        self.inner.ncols()
    }
    fn ncols(&self) -> usize {
        self.inner.ncols()
    }
    fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        let mut tmp = vec![0.0; self.inner.nrows()];
        self.inner.apply_into(x, &mut tmp);
        self.inner.apply_transpose_into(&tmp, y);
    }
}

/// Reduces `Ax = b` (any full-column-rank `A`) to the SPD system `AᵀA x = Aᵀb`.
pub fn normal_equations<A: TransposeOperator>(
    a: A,
    b: &DenseVector,
) -> Result<(NormalOperator<A>, DenseVector)> {
    let t = matvec_transpose(&a, b)?;
    Ok((NormalOperator::new(a), t))
}

/// Wraps an operator and counts calls to `apply_into`.
#[derive(Debug)]
pub struct CountingOperator<A> {
    inner: A,
    calls: AtomicUsize,
}

impl<A> CountingOperator<A> {
    pub fn new(inner: A) -> Self {
        Self {
            inner,
            calls: AtomicUsize::new(0),
        }
    }

    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::Relaxed)
    }

    pub fn reset(&self) {
        self.calls.store(0, Ordering::Relaxed);
    }
}

impl<A: LinearOperator> LinearOperator for CountingOperator<A> {
    fn nrows(&self) -> usize {
        self.inner.nrows()
    }
    fn ncols(&self) -> usize {
        self.inner.ncols()
    }
    fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        self.calls.fetch_add(1, Ordering::Relaxed);
        self.inner.apply_into(x, y)
    }
}
