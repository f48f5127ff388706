//! Spectra of small instances and error-bound checks along solver traces.
//!
//! For SPD `A` with eigenvalues `0 < λ₁ ≤ … ≤ λₙ`, `κ = λₙ/λ₁` and the energy
//! norm `‖u‖²_A = uᵀAu`, two bounds on CG iterates are checked:
//!
//! * step-wise: `‖x_{k+1} − x*‖²_A ≤ (λ_{n−k} − λ₁)/(λ_{n−k} + λ₁) · ‖x₀ − x*‖²_A`
//! * rate: `‖x_k − x*‖_A ≤ 2‖x_k − x₀‖_A · ((√κ − 1)/(√κ + 1))^k`
//!
//! Both are evaluated literally as written above; violations are reported, not
//! corrected. A bound row is satisfied when `lhs ≤ rhs·(1 + 1e-8) + floor`,
//! where `floor` is the rounding level of the energy-norm error (see
//! [`BoundReport::roundoff_floor`]).

use crate::error::{Error, Result};
use crate::precond::{InverseOperator, Preconditioner};
use crate::solvers::IterationTrace;
use crate::sparse::vector::dot_slices;
use crate::sparse::{DenseMatrix, LinearOperator};

/// Relative slack applied to every bound.
pub const BOUND_SLACK: f64 = 1e-8;
/// Sweep limit for the Jacobi eigenvalue iteration.
pub const MAX_JACOBI_SWEEPS: usize = 100;

/// Ascending eigenvalues of an SPD matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralSummary {
    eigenvalues: Vec<f64>,
}

impl SpectralSummary {
    /// Sorts `eigenvalues` and checks they are positive.
    pub fn new(mut eigenvalues: Vec<f64>) -> Result<Self> {
        if eigenvalues.is_empty() {
            return Err(Error::EmptyVector);
        }
        if let Some((index, &value)) = eigenvalues.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite { index, value });
        }
        eigenvalues.sort_by(f64::total_cmp);
        if eigenvalues[0] <= 0.0 {
            return Err(Error::NotPositiveDefinite {
                row: 0,
                pivot: eigenvalues[0],
            });
        }
        Ok(Self { eigenvalues })
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn smallest(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn largest(&self) -> f64 {
        *self.eigenvalues.last().unwrap()
    }

    /// `κ = λₙ/λ₁`.
    pub fn condition_number(&self) -> f64 {
        self.largest() / self.smallest()
    }

    /// `(√κ − 1)/(√κ + 1)`
    pub fn rate(&self) -> f64 {
        let s = self.condition_number().sqrt();
        (s - 1.0) / (s + 1.0)
    }

    /// Single-linkage clusters: adjacent eigenvalues join when
    /// `(λ_{i+1} − λ_i)/λ_{i+1} < epsilon`.
    pub fn cluster_count(&self, epsilon: f64) -> usize {
        1 + self
            .eigenvalues
            .windows(2)
            .filter(|w| (w[1] - w[0]) / w[1] >= epsilon)
            .count()
    }
}

/// Eigenvalues (ascending) of a symmetric matrix by cyclic Jacobi rotations.
///
/// Sweeps until the off-diagonal Frobenius norm is at most `1e-12·‖A‖_F`.
pub fn jacobi_eigenvalues(a: &DenseMatrix) -> Result<Vec<f64>> {
    let n = a.n_rows();
    if n != a.n_cols() {
        return Err(Error::NotSquare {
            rows: n,
            cols: a.n_cols(),
        });
    }
    if n == 0 {
        return Err(Error::EmptyVector);
    }
    let norm = a.frobenius_norm();
    let asym = a.max_asymmetry();
    if asym > 1e-12 * norm {
        return Err(Error::NotSymmetric { max_asymmetry: asym });
    }
    let mut m = a.symmetrized().values().to_vec();
    let target = 1e-12 * norm;

    let off_norm = |m: &[f64]| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += m[i * n + j] * m[i * n + j];
                }
            }
        }
        s.sqrt()
    };

    let mut sweeps = 0;
    while off_norm(&m) > target {
        if sweeps == MAX_JACOBI_SWEEPS {
            return Err(Error::EigenNoConvergence { sweeps });
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = m[p * n + p];
                let aqq = m[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (1.0 + theta * theta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    if k == p || k == q {
                        continue;
                    }
                    let akp = m[k * n + p];
                    let akq = m[k * n + q];
                    let new_kp = c * akp - s * akq;
                    let new_kq = s * akp + c * akq;
                    m[k * n + p] = new_kp;
                    m[p * n + k] = new_kp;
                    m[k * n + q] = new_kq;
                    m[q * n + k] = new_kq;
                }
                m[p * n + p] = app - t * apq;
                m[q * n + q] = aqq + t * apq;
                m[p * n + q] = 0.0;
                m[q * n + p] = 0.0;
            }
        }
        sweeps += 1;
    }
    let mut eig: Vec<f64> = (0..n).map(|i| m[i * n + i]).collect();
    eig.sort_by(f64::total_cmp);
    Ok(eig)
}

/// Spectrum of a symmetric positive-definite matrix.
pub fn symmetric_eigenvalues(a: &DenseMatrix) -> Result<SpectralSummary> {
    SpectralSummary::new(jacobi_eigenvalues(a)?)
}

/// Spectrum of `M⁻¹A`, computed as that of the similar SPD matrix `GᵀAG`
/// where `M⁻¹ = GGᵀ`. Materializes `M⁻¹` densely.
pub fn preconditioned_spectrum<P: Preconditioner + ?Sized>(
    a: &DenseMatrix,
    m: &P,
) -> Result<SpectralSummary> {
    if m.dimension() != a.n_rows() {
        return Err(Error::DimensionMismatch {
            context: "preconditioned_spectrum",
            expected: a.n_rows(),
            found: m.dimension(),
        });
    }
    let m_inv = DenseMatrix::from_operator(&InverseOperator(m)).symmetrized();
    let g = m_inv.cholesky()?;
    let s = g.transpose().matmul(a)?.matmul(&g)?.symmetrized();
    symmetric_eigenvalues(&s)
}

/// `h`, the number of eigenvalue clusters at relative gap `epsilon`.
pub fn predict_cluster_iterations(spectrum: &SpectralSummary, epsilon: f64) -> usize {
    spectrum.cluster_count(epsilon)
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundRow {
    /// Index `j` of the iterate `x_j` on the left-hand side.
    pub iterate: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub satisfied: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundReport {
    pub rows: Vec<BoundRow>,
    /// Absolute tolerance added to every comparison: the attainable accuracy of
    /// the left-hand side, `√n·κ·ε·‖x₀ − x*‖_A` (squared for squared-norm bounds).
    pub roundoff_floor: f64,
}

impl BoundReport {
    pub fn all_satisfied(&self) -> bool {
        self.rows.iter().all(|r| r.satisfied)
    }

    pub fn violations(&self) -> impl Iterator<Item = &BoundRow> {
        self.rows.iter().filter(|r| !r.satisfied)
    }

    /// `max lhs/rhs` over rows with `rhs > 0`.
    pub fn worst_ratio(&self) -> f64 {
        self.rows
            .iter()
            .filter(|r| r.rhs > 0.0)
            .map(|r| r.lhs / r.rhs)
            .fold(0.0, f64::max)
    }
}

fn energy_norm_sq<A: LinearOperator + ?Sized>(a: &A, u: &[f64], scratch: &mut [f64]) -> f64 {
    a.apply_into(u, scratch);
    dot_slices(u, scratch).max(0.0)
}

fn diff(x: &[f64], y: &[f64]) -> Vec<f64> {
    x.iter().zip(y).map(|(a, b)| a - b).collect()
}

struct BoundInputs<'t> {
    iterates: Vec<&'t [f64]>,
    initial_error_sq: f64,
    floor: f64,
}

fn prepare<'t, A: LinearOperator + ?Sized>(
    trace: &'t IterationTrace,
    x_star: &[f64],
    spectrum: &SpectralSummary,
    a: &A,
) -> Result<BoundInputs<'t>> {
    let iterates = trace.iterates().ok_or(Error::MissingTraceVectors)?;
    let n = a.dimension();
    for (context, len) in [("x_star", x_star.len()), ("spectrum", spectrum.len())] {
        if len != n {
            return Err(Error::DimensionMismatch {
                context,
                expected: n,
                found: len,
            });
        }
    }
    let mut scratch = vec![0.0; n];
    let initial_error_sq = energy_norm_sq(a, &diff(iterates[0], x_star), &mut scratch);
    let floor = (n as f64).sqrt() * spectrum.condition_number() * f64::EPSILON * initial_error_sq.sqrt();
    Ok(BoundInputs {
        iterates,
        initial_error_sq,
        floor,
    })
}

fn satisfied(lhs: f64, rhs: f64, floor: f64) -> bool {
    lhs <= rhs * (1.0 + BOUND_SLACK) + floor
}

/// Step-wise eigenvalue bound, in squared energy norm, for every recorded
/// `x_{k+1}` with `n − k ≥ 1`.
pub fn check_bound_eq2<A: LinearOperator + ?Sized>(
    trace: &IterationTrace,
    x_star: &[f64],
    spectrum: &SpectralSummary,
    a: &A,
) -> Result<BoundReport> {
    let inputs = prepare(trace, x_star, spectrum, a)?;
    let n = spectrum.len();
    let lambda = spectrum.eigenvalues();
    let l1 = lambda[0];
    let floor = inputs.floor * inputs.floor;
    let mut scratch = vec![0.0; n];
    let rows = inputs
        .iterates
        .iter()
        .enumerate()
        .skip(1)
        .take_while(|&(j, _)| j <= n)
        .map(|(j, x)| {
            let k = j - 1;
            // λ_{n−k} in 1-based numbering
            let l = lambda[n - k - 1];
            let factor = (l - l1) / (l + l1);
            let lhs = energy_norm_sq(a, &diff(x, x_star), &mut scratch);
            let rhs = factor * inputs.initial_error_sq;
            BoundRow {
                iterate: j,
                lhs,
                rhs,
                satisfied: satisfied(lhs, rhs, floor),
            }
        })
        .collect();
    Ok(BoundReport {
        rows,
        roundoff_floor: floor,
    })
}

/// Condition-number rate bound `‖x_k − x*‖_A ≤ 2‖x_k − x₀‖_A·ρ^k` for every
/// recorded `k ≥ 1`.
pub fn check_bound_eq3<A: LinearOperator + ?Sized>(
    trace: &IterationTrace,
    x_star: &[f64],
    spectrum: &SpectralSummary,
    a: &A,
) -> Result<BoundReport> {
    let inputs = prepare(trace, x_star, spectrum, a)?;
    let x0 = inputs.iterates[0];
    rate_bound(&inputs, spectrum, a, |x, scratch| energy_norm_sq(a, &diff(x, x0), scratch).sqrt(), x_star)
}

/// The same rate with the initial error on the right:
/// `‖x_k − x*‖_A ≤ 2‖x₀ − x*‖_A·ρ^k`. Reported alongside the literal form.
pub fn check_rate_bound_initial_error<A: LinearOperator + ?Sized>(
    trace: &IterationTrace,
    x_star: &[f64],
    spectrum: &SpectralSummary,
    a: &A,
) -> Result<BoundReport> {
    let inputs = prepare(trace, x_star, spectrum, a)?;
    let e0 = inputs.initial_error_sq.sqrt();
    rate_bound(&inputs, spectrum, a, |_, _| e0, x_star)
}

fn rate_bound<A: LinearOperator + ?Sized>(
    inputs: &BoundInputs<'_>,
    spectrum: &SpectralSummary,
    a: &A,
    reference: impl Fn(&[f64], &mut [f64]) -> f64,
    x_star: &[f64],
) -> Result<BoundReport> {
    let rho = spectrum.rate();
    let mut scratch = vec![0.0; a.dimension()];
    let rows = inputs
        .iterates
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, x)| {
            let lhs = energy_norm_sq(a, &diff(x, x_star), &mut scratch).sqrt();
            let rhs = 2.0 * reference(x, &mut scratch) * rho.powi(k as i32);
            BoundRow {
                iterate: k,
                lhs,
                rhs,
                satisfied: satisfied(lhs, rhs, inputs.floor),
            }
        })
        .collect();
    Ok(BoundReport {
        rows,
        roundoff_floor: inputs.floor,
    })
}
