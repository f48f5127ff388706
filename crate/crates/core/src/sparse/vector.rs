//! Dense vectors and the level-1 kernels used by the Krylov solvers.
//!
//! Every reduction sums strictly left to right so that repeated runs produce
//! bit-identical traces.

use std::ops::Deref;

use crate::error::{Error, Result};

/// A non-empty vector of finite `f64` values.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseVector {
    values: Vec<f64>,
}

impl DenseVector {
    /// Validates length and finiteness.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyVector);
        }
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite { index, value });
        }
        Ok(Self { values })
    }

    /// # Panics
    /// If `len == 0`.
    pub fn zeros(len: usize) -> Self {
        Self::filled(len, 0.0)
    }

    /// # Panics
    /// If `len == 0` or `value` is not finite.
    pub fn filled(len: usize, value: f64) -> Self {
        assert!(len > 0, "DenseVector must be non-empty");
        assert!(value.is_finite(), "DenseVector entries must be finite");
        Self {
            values: vec![value; len],
        }
    }

    /// Unit vector `e_index`.
    pub fn unit(len: usize, index: usize) -> Self {
        let mut v = Self::zeros(len);
        v.values[index] = 1.0;
        v
    }

    /// Wraps values produced by internal kernels, skipping validation.
    pub(crate) fn from_vec_unchecked(values: Vec<f64>) -> Self {
        debug_assert!(!values.is_empty());
        Self { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    /// Always `false`; present for API symmetry with `len`.
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.values
    }

    pub fn norm2(&self) -> f64 {
        norm2(&self.values)
    }

    pub fn norm_inf(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_all_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }
}

impl Deref for DenseVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.values
    }
}

impl TryFrom<Vec<f64>> for DenseVector {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        Self::new(values)
    }
}

fn check_lengths(context: &'static str, x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            context,
            expected: x.len(),
            found: y.len(),
        });
    }
    Ok(())
}

/// Inner product `xᵀy`, summed left to right.
pub fn dot(x: &DenseVector, y: &DenseVector) -> Result<f64> {
    check_lengths("dot", x, y)?;
    Ok(dot_slices(x, y))
}

/// Returns `alpha·x + y`.
pub fn saxpy(alpha: f64, x: &DenseVector, y: &DenseVector) -> Result<DenseVector> {
    check_lengths("saxpy", x, y)?;
    let mut out = y.values.clone();
    axpy(alpha, x, &mut out);
    Ok(DenseVector::from_vec_unchecked(out))
}

#[inline]
pub(crate) fn dot_slices(x: &[f64], y: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    let mut acc = 0.0;
    for (a, b) in x.iter().zip(y) {
        acc += a * b;
    }
    acc
}

#[inline]
pub(crate) fn norm2(x: &[f64]) -> f64 {
    dot_slices(x, x).sqrt()
}

/// `y ← alpha·x + y`
#[inline]
pub(crate) fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// `y ← x + beta·y`
#[inline]
pub(crate) fn xpby(x: &[f64], beta: f64, y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi = xi + beta * *yi;
    }
}
