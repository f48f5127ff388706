//! Preconditioners: cheap applications of `M⁻¹` for an SPD `M ≈ A`.
//!
//! Only the inverse action is represented; no type holds a factor `C` with
//! `M = CᵀC`.

use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};

use crate::error::{Error, Result};
use crate::sparse::{DenseMatrix, DenseVector, LinearOperator, SparseMatrixCsr};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PrecondKind {
    Identity,
    Jacobi,
    Ssor,
    IncompleteCholesky,
    PriorDiagonal,
    ExactInverse,
}

impl PrecondKind {
    pub const ALL: [PrecondKind; 6] = [
        PrecondKind::Identity,
        PrecondKind::Jacobi,
        PrecondKind::Ssor,
        PrecondKind::IncompleteCholesky,
        PrecondKind::PriorDiagonal,
        PrecondKind::ExactInverse,
    ];

    /// Command-line spelling.
    pub fn as_str(self) -> &'static str {
        match self {
            PrecondKind::Identity => "none",
            PrecondKind::Jacobi => "jacobi",
            PrecondKind::Ssor => "ssor",
            PrecondKind::IncompleteCholesky => "ic0",
            PrecondKind::PriorDiagonal => "prior",
            PrecondKind::ExactInverse => "exact",
        }
    }
}

impl fmt::Display for PrecondKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PrecondKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PrecondKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s || (s == "identity" && *k == PrecondKind::Identity))
            .ok_or_else(|| Error::InvalidParameter(format!("unknown preconditioner '{s}'")))
    }
}

/// Application of `M⁻¹` for a symmetric positive-definite `M`.
pub trait Preconditioner {
    fn dimension(&self) -> usize;

    /// Writes `M⁻¹r` into `z`. Both slices have length `dimension()`.
    fn apply_into(&self, r: &[f64], z: &mut [f64]);

    fn kind(&self) -> PrecondKind;

    /// Checked `M⁻¹r`.
    fn apply(&self, r: &DenseVector) -> Result<DenseVector> {
        if r.len() != self.dimension() {
            return Err(Error::DimensionMismatch {
                context: "preconditioner apply",
                expected: self.dimension(),
                found: r.len(),
            });
        }
        let mut z = vec![0.0; r.len()];
        self.apply_into(r, &mut z);
        DenseVector::new(z)
    }
}

impl<P: Preconditioner + ?Sized> Preconditioner for &P {
    fn dimension(&self) -> usize {
        (**self).dimension()
    }
    fn apply_into(&self, r: &[f64], z: &mut [f64]) {
        (**self).apply_into(r, z)
    }
    fn kind(&self) -> PrecondKind {
        (**self).kind()
    }
}

impl<P: Preconditioner + ?Sized> Preconditioner for Box<P> {
    fn dimension(&self) -> usize {
        (**self).dimension()
    }
    fn apply_into(&self, r: &[f64], z: &mut [f64]) {
        (**self).apply_into(r, z)
    }
    fn kind(&self) -> PrecondKind {
        (**self).kind()
    }
}

/// Views `M⁻¹` as a linear operator (for materialization and spectra).
pub struct InverseOperator<'a, P: ?Sized>(pub &'a P);

impl<P: Preconditioner + ?Sized> LinearOperator for InverseOperator<'_, P> {
    fn nrows(&self) -> usize {
        self.0.dimension()
    }
    fn ncols(&self) -> usize {
        self.0.dimension()
    }
    fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        self.0.apply_into(x, y)
    }
}

/// `M = I`.
#[derive(Clone, Debug)]
pub struct Identity {
    n: usize,
}

impl Identity {
    pub fn new(n: usize) -> Self {
        Self { n }
    }
}

impl Preconditioner for Identity {
    fn dimension(&self) -> usize {
        self.n
    }
    fn apply_into(&self, r: &[f64], z: &mut [f64]) {
        z.copy_from_slice(r);
    }
    fn kind(&self) -> PrecondKind {
        PrecondKind::Identity
    }
}

fn inverted_positive(diag: &[f64]) -> Result<Vec<f64>> {
    diag.iter()
        .enumerate()
        .map(|(row, &d)| {
            if d > 0.0 && d.is_finite() {
                Ok(1.0 / d)
            } else {
                Err(Error::NonPositiveDiagonal { row, value: d })
            }
        })
        .collect()
}

fn diagonal_apply(inv: &[f64], r: &[f64], z: &mut [f64]) {
    for ((zi, ri), di) in z.iter_mut().zip(r).zip(inv) {
        *zi = ri * di;
    }
}

/// Diagonal scaling, `M = diag(A)`.
#[derive(Clone, Debug)]
pub struct Jacobi {
    inv_diag: Vec<f64>,
}

impl Jacobi {
    pub fn from_matrix(a: &SparseMatrixCsr) -> Result<Self> {
        require_square(a)?;
        Self::from_diagonal(&a.diagonal())
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        Ok(Self {
            inv_diag: inverted_positive(diag)?,
        })
    }
}

impl Preconditioner for Jacobi {
    fn dimension(&self) -> usize {
        self.inv_diag.len()
    }
    fn apply_into(&self, r: &[f64], z: &mut [f64]) {
        diagonal_apply(&self.inv_diag, r, z)
    }
    fn kind(&self) -> PrecondKind {
        PrecondKind::Jacobi
    }
}

/// Prior-precision preconditioner `M = Λ` for posterior systems `XᵀX/τ² + Λ`.
#[derive(Clone, Debug)]
pub struct PriorDiagonal {
    inv_precision: Vec<f64>,
}

impl PriorDiagonal {
    pub fn new(prior_precision: &[f64]) -> Result<Self> {
        Ok(Self {
            inv_precision: inverted_positive(prior_precision)?,
        })
    }
}

impl Preconditioner for PriorDiagonal {
    fn dimension(&self) -> usize {
        self.inv_precision.len()
    }
    fn apply_into(&self, r: &[f64], z: &mut [f64]) {
        diagonal_apply(&self.inv_precision, r, z)
    }
    fn kind(&self) -> PrecondKind {
        PrecondKind::PriorDiagonal
    }
}

/// Symmetric successive over-relaxation.
///
/// With `A = L + D + Lᵀ`,
/// `M = (ω/(2−ω))⁻¹ · (D/ω + L)(D/ω)⁻¹(D/ω + Lᵀ)`,
/// applied as one forward and one backward triangular sweep over `A`'s rows.
/// `A` must be symmetric; the backward sweep reads `Lᵀ` from the upper triangle.
#[derive(Clone, Debug)]
pub struct Ssor {
    a: SparseMatrixCsr,
    scaled_diag: Vec<f64>,
    omega: f64,
}

impl Ssor {
    pub const DEFAULT_OMEGA: f64 = 1.0;

    pub fn new(a: &SparseMatrixCsr, omega: f64) -> Result<Self> {
        if !(omega > 0.0 && omega < 2.0) {
            return Err(Error::InvalidParameter(format!(
                "SSOR relaxation parameter must lie in (0, 2), got {omega}"
            )));
        }
        require_square(a)?;
        let diag = a.diagonal();
        inverted_positive(&diag)?;
        Ok(Self {
            a: a.clone(),
            scaled_diag: diag.iter().map(|d| d / omega).collect(),
            omega,
        })
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }
}

impl Preconditioner for Ssor {
    fn dimension(&self) -> usize {
        self.scaled_diag.len()
    }

    fn apply_into(&self, r: &[f64], z: &mut [f64]) {
        let n = self.dimension();
        // (D/ω + L) y = r
        let mut y = vec![0.0; n];
        for i in 0..n {
            let (cols, vals) = self.a.row(i);
            let mut s = r[i];
            for (&j, &v) in cols.iter().zip(vals) {
                if j >= i {
                    break;
                }
                s -= v * y[j];
            }
            y[i] = s / self.scaled_diag[i];
        }
        // y ← (D/ω) y
        for (yi, d) in y.iter_mut().zip(&self.scaled_diag) {
            *yi *= d;
        }
        // (D/ω + Lᵀ) z = y
        for i in (0..n).rev() {
            let (cols, vals) = self.a.row(i);
            let mut s = y[i];
            for (&j, &v) in cols.iter().zip(vals).rev() {
                if j <= i {
                    break;
                }
                s -= v * z[j];
            }
            z[i] = s / self.scaled_diag[i];
        }
        let scale = self.omega / (2.0 - self.omega);
        for zi in z.iter_mut() {
            *zi *= scale;
        }
    }

    fn kind(&self) -> PrecondKind {
        PrecondKind::Ssor
    }
}

/// Zero fill-in incomplete Cholesky, `M = LLᵀ` with `L` on `A`'s lower pattern.
#[derive(Clone, Debug)]
pub struct IncompleteCholesky {
    factor: SparseMatrixCsr,
    shift: f64,
}

impl IncompleteCholesky {
    /// Number of doublings of the diagonal shift after the first shifted attempt.
    pub const SHIFT_DOUBLINGS: usize = 3;
    /// First shift as a fraction of the mean diagonal.
    pub const INITIAL_SHIFT_FRACTION: f64 = 1e-3;

    /// Factors `A`; on a non-positive pivot retries with `A + αI`, starting at
    /// `α = 1e-3·mean(diag A)` and doubling up to three times.
    pub fn new(a: &SparseMatrixCsr) -> Result<Self> {
        require_square(a)?;
        let n = a.n_rows();
        let lower = a.lower_triangle();
        let mean_diag = if n == 0 {
            0.0
        } else {
            a.diagonal().iter().sum::<f64>() / n as f64
        };
        let base = Self::INITIAL_SHIFT_FRACTION * mean_diag.abs().max(f64::MIN_POSITIVE);

        let shifts = std::iter::once(0.0)
            .chain((0..=Self::SHIFT_DOUBLINGS).map(|d| base * f64::powi(2.0, d as i32)));
        let mut attempts = 0;
        let mut last = (0, 0.0);
        for shift in shifts {
            attempts += 1;
            let target = if shift == 0.0 { lower.clone() } else { lower.shifted(shift) };
            match factor_ic0(&target) {
                Ok(factor) => return Ok(Self { factor, shift }),
                Err(row) => last = (row, shift),
            }
        }
        Err(Error::FactorizationBreakdown {
            row: last.0,
            attempts,
            shift: last.1,
        })
    }

    /// Lower-triangular factor `L`.
    pub fn factor(&self) -> &SparseMatrixCsr {
        &self.factor
    }

    /// Diagonal shift that was needed (0 when the plain factorization succeeded).
    pub fn shift(&self) -> f64 {
        self.shift
    }
}

/// IC(0) on a lower-triangular CSR pattern (diagonal included). Returns the
/// failing row on a non-positive pivot.
fn factor_ic0(lower: &SparseMatrixCsr) -> std::result::Result<SparseMatrixCsr, usize> {
    let n = lower.n_rows();
    let offsets = lower.row_offsets();
    let cols = lower.col_indices();
    let mut vals = lower.values().to_vec();
    let mut diag_pos = vec![usize::MAX; n];
    // work[k] holds L_ik for the row being factored.
    let mut work = vec![0.0; n];

    for i in 0..n {
        let (start, end) = (offsets[i], offsets[i + 1]);
        let mut diag_acc = None;
        for idx in start..end {
            let j = cols[idx];
            if j == i {
                diag_acc = Some(idx);
                break;
            }
            let mut s = vals[idx];
            for jdx in offsets[j]..diag_pos[j] {
                s -= vals[jdx] * work[cols[jdx]];
            }
            let l_ij = s / vals[diag_pos[j]];
            vals[idx] = l_ij;
            work[j] = l_ij;
        }
        let Some(didx) = diag_acc else {
            return Err(i);
        };
        let mut pivot = vals[didx];
        for idx in start..didx {
            pivot -= vals[idx] * vals[idx];
        }
        if !(pivot > 0.0) || !pivot.is_finite() {
            return Err(i);
        }
        vals[didx] = pivot.sqrt();
        diag_pos[i] = didx;
        for idx in start..didx {
            work[cols[idx]] = 0.0;
        }
    }
    Ok(SparseMatrixCsr::new(n, n, offsets.to_vec(), cols.to_vec(), vals)
        .expect("factor keeps the input pattern"))
}

impl Preconditioner for IncompleteCholesky {
    fn dimension(&self) -> usize {
        self.factor.n_rows()
    }

    fn apply_into(&self, r: &[f64], z: &mut [f64]) {
        let n = self.dimension();
        // L y = r, diagonal is the last entry of each row
        for i in 0..n {
            let (cols, vals) = self.factor.row(i);
            let last = cols.len() - 1;
            let mut s = r[i];
            for k in 0..last {
                s -= vals[k] * z[cols[k]];
            }
            z[i] = s / vals[last];
        }
        // Lᵀ z = y, column-oriented over the rows of L
        for i in (0..n).rev() {
            let (cols, vals) = self.factor.row(i);
            let last = cols.len() - 1;
            z[i] /= vals[last];
            let zi = z[i];
            for k in 0..last {
                z[cols[k]] -= vals[k] * zi;
            }
        }
    }

    fn kind(&self) -> PrecondKind {
        PrecondKind::IncompleteCholesky
    }
}

/// `M = A` exactly, with a dense `A⁻¹`. Intended for small test instances.
#[derive(Clone, Debug)]
pub struct ExactInverse {
    inverse: DenseMatrix,
}

impl ExactInverse {
    pub fn from_matrix(a: &DenseMatrix) -> Result<Self> {
        Ok(Self {
            inverse: a.inverse_spd()?,
        })
    }

    pub fn inverse(&self) -> &DenseMatrix {
        &self.inverse
    }
}

impl Preconditioner for ExactInverse {
    fn dimension(&self) -> usize {
        self.inverse.n_rows()
    }
    fn apply_into(&self, r: &[f64], z: &mut [f64]) {
        self.inverse.apply_into(r, z)
    }
    fn kind(&self) -> PrecondKind {
        PrecondKind::ExactInverse
    }
}

/// Wraps a preconditioner and counts applications.
#[derive(Debug)]
pub struct CountingPreconditioner<P> {
    inner: P,
    calls: AtomicUsize,
}

impl<P> CountingPreconditioner<P> {
    pub fn new(inner: P) -> Self {
        Self {
            inner,
            calls: AtomicUsize::new(0),
        }
    }

    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::Relaxed)
    }
}

impl<P: Preconditioner> Preconditioner for CountingPreconditioner<P> {
    fn dimension(&self) -> usize {
        self.inner.dimension()
    }
    fn apply_into(&self, r: &[f64], z: &mut [f64]) {
        self.calls.fetch_add(1, Ordering::Relaxed);
        self.inner.apply_into(r, z)
    }
    fn kind(&self) -> PrecondKind {
        self.inner.kind()
    }
}

fn require_square(a: &SparseMatrixCsr) -> Result<()> {
    if a.n_rows() != a.n_cols() {
        return Err(Error::NotSquare {
            rows: a.n_rows(),
            cols: a.n_cols(),
        });
    }
    Ok(())
}

/// Builds a preconditioner of the given kind for `a`.
///
/// `PriorDiagonal` needs `prior_precision`; `ExactInverse` densifies `a`.
pub fn build(
    kind: PrecondKind,
    a: &SparseMatrixCsr,
    ssor_omega: f64,
    prior_precision: Option<&[f64]>,
) -> Result<Box<dyn Preconditioner + Send + Sync>> {
    require_square(a)?;
    Ok(match kind {
        PrecondKind::Identity => Box::new(Identity::new(a.n_rows())),
        PrecondKind::Jacobi => Box::new(Jacobi::from_matrix(a)?),
        PrecondKind::Ssor => Box::new(Ssor::new(a, ssor_omega)?),
        PrecondKind::IncompleteCholesky => Box::new(IncompleteCholesky::new(a)?),
        PrecondKind::PriorDiagonal => {
            let prior = prior_precision.ok_or_else(|| {
                Error::InvalidParameter("prior preconditioner requires a prior precision vector".into())
            })?;
            if prior.len() != a.n_rows() {
                return Err(Error::DimensionMismatch {
                    context: "prior precision",
                    expected: a.n_rows(),
                    found: prior.len(),
                });
            }
            Box::new(PriorDiagonal::new(prior)?)
        }
        PrecondKind::ExactInverse => Box::new(ExactInverse::from_matrix(&a.to_dense())?),
    })
}
