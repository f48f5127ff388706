//! Conjugate gradient and preconditioned conjugate gradient.
//!
//! Both solvers run the same economic recurrence:
//!
//! ```text
//! r = b - A x0;  z = M⁻¹ r;  p = z;  ρ = rᵀz
//! loop
//!     (k > 1)  τ = ρ / ρ₋;  p = z + τ p
//!     w = A p                         one operator application
//!     a = ρ / pᵀw;  x += a p;  r -= a w
//!     ρ₋ = ρ;  z = M⁻¹ r;  ρ = rᵀz     one preconditioner application
//! ```
//!
//! Plain CG is the same loop with `z` aliased to `r`, so no copy or extra
//! inner product is made; PCG with the identity preconditioner reproduces its
//! iterates bit for bit.
//!
//! Iteration stops once `‖r‖₂ ≤ max(rel_tolerance·‖b‖₂, abs_tolerance)`, using
//! the recurrence residual. The true residual `b − Ax` is recomputed once at the
//! end when [`SolveConfig::verify_true_residual`] is set.

use crate::error::{Error, Result};
use crate::precond::Preconditioner;
use crate::sparse::vector::{axpy, dot_slices, norm2, xpby};
use crate::sparse::{DenseVector, LinearOperator};

#[derive(Clone, Debug, PartialEq)]
pub struct SolveConfig {
    pub rel_tolerance: f64,
    pub abs_tolerance: f64,
    /// `None` means `10·n`.
    pub max_iterations: Option<usize>,
    pub record_trace: bool,
    /// Store `x_k`, `r_k` and `p_{k−1}` in every trace record. Implies `record_trace`.
    pub record_vectors: bool,
    /// Recompute `b − Ax` once at termination (one extra operator application).
    pub verify_true_residual: bool,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            rel_tolerance: 1e-10,
            abs_tolerance: 0.0,
            max_iterations: None,
            record_trace: false,
            record_vectors: false,
            verify_true_residual: true,
        }
    }
}

impl SolveConfig {
    pub fn with_rel_tolerance(mut self, tol: f64) -> Self {
        self.rel_tolerance = tol;
        self
    }

    pub fn with_abs_tolerance(mut self, tol: f64) -> Self {
        self.abs_tolerance = tol;
        self
    }

    pub fn with_max_iterations(mut self, max: usize) -> Self {
        self.max_iterations = Some(max);
        self
    }

    pub fn with_trace(mut self) -> Self {
        self.record_trace = true;
        self
    }

    pub fn with_vectors(mut self) -> Self {
        self.record_trace = true;
        self.record_vectors = true;
        self
    }

    pub fn without_true_residual(mut self) -> Self {
        self.verify_true_residual = false;
        self
    }

    pub fn validate(&self) -> Result<()> {
        for (name, t) in [("rel_tolerance", self.rel_tolerance), ("abs_tolerance", self.abs_tolerance)] {
            if !(t >= 0.0) || !t.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be finite and >= 0, got {t}")));
            }
        }
        if self.max_iterations == Some(0) {
            return Err(Error::InvalidParameter("max_iterations must be >= 1".into()));
        }
        Ok(())
    }

    fn iteration_cap(&self, n: usize) -> usize {
        self.max_iterations.unwrap_or(10 * n)
    }
}

/// Vectors kept per iteration when `record_vectors` is on.
#[derive(Clone, Debug, PartialEq)]
pub struct IterateVectors {
    /// `x_k`
    pub iterate: Vec<f64>,
    /// Recurrence residual `r_k`.
    pub residual: Vec<f64>,
    /// `p_{k−1}`, the direction that produced `x_k`; `None` for `k = 0`.
    pub direction: Option<Vec<f64>>,
}

/// State after iteration `k` (record `0` is the initial guess).
#[derive(Clone, Debug, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    /// `‖r_k‖₂` of the recurrence residual.
    pub residual_norm: f64,
    /// `a_{k−1}` with `x_k = x_{k−1} + a_{k−1} p_{k−1}`.
    pub step_size: Option<f64>,
    /// `τ_{k−2}` used to form `p_{k−1}`; `None` for the first two records.
    pub direction_coefficient: Option<f64>,
    /// `φ(x_k) = ½x_kᵀAx_k − x_kᵀb`.
    pub energy: f64,
    pub vectors: Option<IterateVectors>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct IterationTrace {
    pub records: Vec<IterationRecord>,
}

impl IterationTrace {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn has_vectors(&self) -> bool {
        !self.records.is_empty() && self.records.iter().all(|r| r.vectors.is_some())
    }

    /// `x_0, x_1, …` when vectors were recorded.
    pub fn iterates(&self) -> Option<Vec<&[f64]>> {
        self.records
            .iter()
            .map(|r| r.vectors.as_ref().map(|v| v.iterate.as_slice()))
            .collect()
    }

    /// `r_0, r_1, …` when vectors were recorded.
    pub fn residuals(&self) -> Option<Vec<&[f64]>> {
        self.records
            .iter()
            .map(|r| r.vectors.as_ref().map(|v| v.residual.as_slice()))
            .collect()
    }

    /// `p_0, p_1, …` when vectors were recorded.
    pub fn directions(&self) -> Option<Vec<&[f64]>> {
        self.records
            .iter()
            .skip(1)
            .map(|r| r.vectors.as_ref().and_then(|v| v.direction.as_deref()))
            .collect()
    }

    pub fn residual_norms(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.residual_norm).collect()
    }
}

/// Why a solve stopped without converging.
#[derive(Clone, Debug, PartialEq)]
pub enum Breakdown {
    /// `pᵀAp ≤ 0`: the operator is not positive definite on the Krylov subspace.
    NotPositiveDefinite { iteration: usize, curvature: f64 },
    /// `rᵀM⁻¹r ≤ 0` with `r ≠ 0`: the preconditioner is not positive definite.
    PreconditionerBreakdown { iteration: usize, rz: f64 },
    /// Residual norm or step size became non-finite.
    NumericalDivergence { iteration: usize },
    MaxIterationsExceeded { iterations: usize },
    /// Recurrence met the tolerance but the recomputed `b − Ax` does not.
    ResidualDrift { recurrence_norm: f64, true_norm: f64 },
}

impl Breakdown {
    pub fn name(&self) -> &'static str {
        match self {
            Breakdown::NotPositiveDefinite { .. } => "NotPositiveDefinite",
            Breakdown::PreconditionerBreakdown { .. } => "PreconditionerBreakdown",
            Breakdown::NumericalDivergence { .. } => "NumericalDivergence",
            Breakdown::MaxIterationsExceeded { .. } => "MaxIterationsExceeded",
            Breakdown::ResidualDrift { .. } => "ResidualDrift",
        }
    }
}

impl std::fmt::Display for Breakdown {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Breakdown::NotPositiveDefinite { iteration, curvature } => {
                write!(f, "NotPositiveDefinite: pᵀAp = {curvature:e} at iteration {iteration}")
            }
            Breakdown::PreconditionerBreakdown { iteration, rz } => {
                write!(f, "PreconditionerBreakdown: rᵀz = {rz:e} at iteration {iteration}")
            }
            Breakdown::NumericalDivergence { iteration } => {
                write!(f, "NumericalDivergence at iteration {iteration}")
            }
            Breakdown::MaxIterationsExceeded { iterations } => {
                write!(f, "MaxIterationsExceeded after {iterations} iterations")
            }
            Breakdown::ResidualDrift {
                recurrence_norm,
                true_norm,
            } => write!(
                f,
                "ResidualDrift: recurrence residual {recurrence_norm:e}, true residual {true_norm:e}"
            ),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveResult {
    /// Final iterate; on breakdown, the last iterate before the failing step.
    pub solution: DenseVector,
    pub iterations: usize,
    pub converged: bool,
    /// `‖b − Ax‖₂ / ‖b‖₂` (true residual when verified, recurrence otherwise);
    /// the absolute norm when `b = 0`.
    pub final_rel_residual: f64,
    pub trace: Option<IterationTrace>,
    pub breakdown: Option<Breakdown>,
}

/// Returns `b − Ax`.
pub fn residual<A: LinearOperator + ?Sized>(a: &A, x: &DenseVector, b: &DenseVector) -> Result<DenseVector> {
    check_dims(a, b, x)?;
    let mut r = vec![0.0; a.nrows()];
    a.apply_into(x, &mut r);
    for (ri, bi) in r.iter_mut().zip(b.iter()) {
        *ri = bi - *ri;
    }
    Ok(DenseVector::from_vec_unchecked(r))
}

/// Conjugate gradient for SPD `A`.
pub fn solve_cg<A: LinearOperator + ?Sized>(
    a: &A,
    b: &DenseVector,
    x0: &DenseVector,
    cfg: &SolveConfig,
) -> Result<SolveResult> {
    run(a, b, x0, None, cfg)
}

/// Preconditioned conjugate gradient for SPD `A` and SPD `M`.
pub fn solve_pcg<A: LinearOperator + ?Sized, M: Preconditioner + ?Sized>(
    a: &A,
    b: &DenseVector,
    x0: &DenseVector,
    m: &M,
    cfg: &SolveConfig,
) -> Result<SolveResult> {
    if m.dimension() != b.len() {
        return Err(Error::DimensionMismatch {
            context: "solve_pcg preconditioner",
            expected: b.len(),
            found: m.dimension(),
        });
    }
    run(a, b, x0, Some(&|r: &[f64], z: &mut [f64]| m.apply_into(r, z)), cfg)
}

fn check_dims<A: LinearOperator + ?Sized>(a: &A, b: &[f64], x0: &[f64]) -> Result<()> {
    if !a.is_square() {
        return Err(Error::NotSquare {
            rows: a.nrows(),
            cols: a.ncols(),
        });
    }
    for (context, len) in [("right-hand side", b.len()), ("initial guess", x0.len())] {
        if len != a.dimension() {
            return Err(Error::DimensionMismatch {
                context,
                expected: a.dimension(),
                found: len,
            });
        }
    }
    Ok(())
}

type ApplyInverse<'a> = &'a dyn Fn(&[f64], &mut [f64]);

fn run<A: LinearOperator + ?Sized>(
    a: &A,
    b: &DenseVector,
    x0: &DenseVector,
    precond: Option<ApplyInverse<'_>>,
    cfg: &SolveConfig,
) -> Result<SolveResult> {
    cfg.validate()?;
    check_dims(a, b, x0)?;
    let n = b.len();
    let max_iterations = cfg.iteration_cap(n);
    let record_trace = cfg.record_trace || cfg.record_vectors;

    let mut x = x0.to_vec();
    let mut r = b.to_vec();
    let mut w = vec![0.0; n];
    if !x0.is_all_zero() {
        a.apply_into(&x, &mut w);
        axpy(-1.0, &w, &mut r);
    }
    let b_norm = norm2(b);
    let threshold = (cfg.rel_tolerance * b_norm).max(cfg.abs_tolerance);

    // With a preconditioner, z = M⁻¹r is formed lazily at the top of each
    // iteration, so the residual that satisfies the stopping test is never
    // preconditioned. Without one, z is r itself.
    let mut z = match precond {
        Some(_) => vec![0.0; n],
        None => Vec::new(),
    };
    let mut rho = dot_slices(&r, &r);
    let mut r_norm = rho.sqrt();
    let mut p = r.clone();
    let mut rho_prev = rho;

    // φ(x) = ½xᵀAx − xᵀb = −½xᵀ(b + r) with r = b − Ax; no extra product needed.
    let energy = |x: &[f64], r: &[f64]| -> f64 {
        let mut acc = 0.0;
        for ((xi, bi), ri) in x.iter().zip(b.iter()).zip(r) {
            acc += xi * (bi + ri);
        }
        -0.5 * acc
    };

    let mut trace = record_trace.then(IterationTrace::default);
    if let Some(t) = trace.as_mut() {
        t.records.push(IterationRecord {
            iteration: 0,
            residual_norm: r_norm,
            step_size: None,
            direction_coefficient: None,
            energy: energy(&x, &r),
            vectors: cfg.record_vectors.then(|| IterateVectors {
                iterate: x.clone(),
                residual: r.clone(),
                direction: None,
            }),
        });
    }

    let mut k = 0usize;
    let breakdown = loop {
        if !r_norm.is_finite() {
            break Some(Breakdown::NumericalDivergence { iteration: k });
        }
        if r_norm <= threshold {
            break None;
        }
        if k == max_iterations {
            break Some(Breakdown::MaxIterationsExceeded { iterations: k });
        }
        if let Some(apply) = precond {
            apply(&r, &mut z);
            rho = dot_slices(&r, &z);
            if !(rho > 0.0) {
                break Some(if rho.is_nan() {
                    Breakdown::NumericalDivergence { iteration: k }
                } else {
                    Breakdown::PreconditionerBreakdown { iteration: k + 1, rz: rho }
                });
            }
            if k == 0 {
                p.copy_from_slice(&z);
            }
        }

        let mut tau = None;
        if k > 0 {
            let t = rho / rho_prev;
            match precond {
                Some(_) => xpby(&z, t, &mut p),
                None => xpby(&r, t, &mut p),
            }
            tau = Some(t);
        }

        a.apply_into(&p, &mut w);
        let curvature = dot_slices(&p, &w);
        if curvature.is_nan() {
            break Some(Breakdown::NumericalDivergence { iteration: k + 1 });
        }
        if curvature <= 0.0 {
            break Some(Breakdown::NotPositiveDefinite {
                iteration: k + 1,
                curvature,
            });
        }
        let step = rho / curvature;
        if !step.is_finite() {
            break Some(Breakdown::NumericalDivergence { iteration: k + 1 });
        }
        axpy(step, &p, &mut x);
        axpy(-step, &w, &mut r);
        rho_prev = rho;
        match precond {
            Some(_) => r_norm = norm2(&r),
            None => {
                rho = dot_slices(&r, &r);
                r_norm = rho.sqrt();
            }
        }
        k += 1;

        if let Some(t) = trace.as_mut() {
            t.records.push(IterationRecord {
                iteration: k,
                residual_norm: r_norm,
                step_size: Some(step),
                direction_coefficient: tau,
                energy: energy(&x, &r),
                vectors: cfg.record_vectors.then(|| IterateVectors {
                    iterate: x.clone(),
                    residual: r.clone(),
                    direction: Some(p.clone()),
                }),
            });
        }
    };

    let scale = if b_norm > 0.0 { b_norm } else { 1.0 };
    let mut final_norm = r_norm;
    let mut breakdown = breakdown;
    if cfg.verify_true_residual && x.iter().all(|v| v.is_finite()) {
        a.apply_into(&x, &mut w);
        let true_norm = w
            .iter()
            .zip(b.iter())
            .map(|(ax, bi)| (bi - ax) * (bi - ax))
            .sum::<f64>()
            .sqrt();
        if breakdown.is_none() && !(true_norm <= threshold) {
            breakdown = Some(Breakdown::ResidualDrift {
                recurrence_norm: r_norm,
                true_norm,
            });
        }
        final_norm = true_norm;
    }

    let solution = DenseVector::new(x).unwrap_or_else(|_| x0.clone());
    Ok(SolveResult {
        solution,
        iterations: k,
        converged: breakdown.is_none(),
        final_rel_residual: final_norm / scale,
        trace,
        breakdown,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::precond::Identity;
    use crate::sparse::SparseMatrixCsr;

    fn vec(v: &[f64]) -> DenseVector {
        DenseVector::new(v.to_vec()).unwrap()
    }

    fn two_by_two() -> SparseMatrixCsr {
        SparseMatrixCsr::from_triplets(2, 2, [(0, 0, 2.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 3.0)])
            .unwrap()
    }

    #[test]
    fn identity_converges_in_one_iteration() {
        let b = vec(&[3.0, -1.0, 2.5]);
        let res = solve_cg(&SparseMatrixCsr::identity(3), &b, &DenseVector::zeros(3), &SolveConfig::default())
            .unwrap();
        assert!(res.converged);
        assert_eq!(res.iterations, 1);
        assert_eq!(res.solution, b);
    }

    #[test]
    fn two_by_two_solution() {
        let res = solve_cg(&two_by_two(), &vec(&[3.0, 4.0]), &DenseVector::zeros(2), &SolveConfig::default())
            .unwrap();
        assert!(res.converged);
        assert!(res.iterations <= 2);
        for v in res.solution.iter() {
            assert!((v - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_rhs_with_zero_guess_needs_no_iterations() {
        let res = solve_cg(&two_by_two(), &DenseVector::zeros(2), &DenseVector::zeros(2), &SolveConfig::default())
            .unwrap();
        assert!(res.converged);
        assert_eq!(res.iterations, 0);
    }

    #[test]
    fn indefinite_matrix_reports_breakdown() {
        let a = SparseMatrixCsr::from_diagonal(&[1.0, -1.0]);
        let res = solve_cg(&a, &vec(&[0.0, 1.0]), &DenseVector::zeros(2), &SolveConfig::default()).unwrap();
        assert!(!res.converged);
        assert!(matches!(res.breakdown, Some(Breakdown::NotPositiveDefinite { iteration: 1, .. })));
    }

    #[test]
    fn max_iterations_keeps_best_iterate() {
        let a = SparseMatrixCsr::from_diagonal(&[1.0, 2.0, 3.0]);
        let cfg = SolveConfig::default().with_max_iterations(1);
        let res = solve_cg(&a, &vec(&[1.0, 1.0, 1.0]), &DenseVector::zeros(3), &cfg).unwrap();
        assert!(!res.converged);
        assert_eq!(res.iterations, 1);
        assert_eq!(res.breakdown, Some(Breakdown::MaxIterationsExceeded { iterations: 1 }));
        assert!(res.solution.iter().any(|&v| v != 0.0));
    }

    #[test]
    fn invalid_config_and_dimensions() {
        let a = two_by_two();
        let b = vec(&[1.0, 1.0]);
        let x0 = DenseVector::zeros(2);
        let bad = SolveConfig::default().with_rel_tolerance(-1.0);
        assert!(solve_cg(&a, &b, &x0, &bad).is_err());
        assert!(solve_cg(&a, &b, &x0, &SolveConfig::default().with_max_iterations(0)).is_err());
        assert!(solve_cg(&a, &vec(&[1.0]), &DenseVector::zeros(1), &SolveConfig::default()).is_err());
        let rect = SparseMatrixCsr::from_triplets(2, 3, [(0, 0, 1.0)]).unwrap();
        assert!(matches!(
            solve_cg(&rect, &b, &x0, &SolveConfig::default()),
            Err(Error::NotSquare { .. })
        ));
        assert!(solve_pcg(&a, &b, &x0, &Identity::new(3), &SolveConfig::default()).is_err());
    }

    #[test]
    fn residual_definition() {
        let a = two_by_two();
        let b = vec(&[3.0, 4.0]);
        let r = residual(&a, &vec(&[1.0, 1.0]), &b).unwrap();
        assert!(r.norm_inf() <= 1e-14);
        assert_eq!(residual(&a, &DenseVector::zeros(2), &b).unwrap(), b);
    }

    #[test]
    fn nonzero_initial_guess() {
        let a = two_by_two();
        let b = vec(&[3.0, 4.0]);
        let res = solve_cg(&a, &b, &vec(&[10.0, -7.0]), &SolveConfig::default()).unwrap();
        assert!(res.converged);
        assert!(res.final_rel_residual <= 1e-10);
    }

    #[test]
    fn trace_records_every_iteration() {
        let a = SparseMatrixCsr::from_diagonal(&[1.0, 2.0, 3.0, 4.0]);
        let cfg = SolveConfig::default().with_vectors();
        let res = solve_cg(&a, &vec(&[1.0, 1.0, 1.0, 1.0]), &DenseVector::zeros(4), &cfg).unwrap();
        let trace = res.trace.unwrap();
        assert_eq!(trace.len(), res.iterations + 1);
        assert!(trace.records[1].direction_coefficient.is_none());
        assert!(trace.records[2].direction_coefficient.is_some());
        assert_eq!(trace.directions().unwrap().len(), res.iterations);
        assert_eq!(trace.records[0].energy, 0.0);
    }
}
