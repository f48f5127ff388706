//! Conditional Gaussian posterior draws for linear regression with a
//! diagonal shrinkage prior, computed by preconditioned CG.
//!
//! Model: `y = Xβ + ε`, `ε ∼ N(0, τ²Iₙ)`, `β ∼ N(0, Λ⁻¹)` with `Λ` diagonal and
//! held fixed. The conditional posterior is `N(Φ⁻¹Xᵀy/τ², Φ⁻¹)` with precision
//! `Φ = XᵀX/τ² + Λ`.
//!
//! A draw needs one linear solve. With `u ∼ N(0, Iₙ)` and `v ∼ N(0, Iₚ)`,
//!
//! ```text
//! b = Xᵀy/τ² + Xᵀu/τ + Λ^{1/2} v
//! ```
//!
//! has mean `Xᵀy/τ²` and covariance `XᵀX/τ² + Λ = Φ`, so `β = Φ⁻¹b` has mean
//! `Φ⁻¹Xᵀy/τ²` and covariance `Φ⁻¹ΦΦ⁻¹ = Φ⁻¹`. The solve uses PCG with
//! `M = Λ`, which only needs `Φ` through products `v ↦ Xᵀ(Xv)/τ² + Λ∘v`.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::precond::{Identity, Jacobi, Preconditioner, PriorDiagonal};
use crate::solvers::{solve_pcg, Breakdown, SolveConfig};
use crate::sparse::{DenseMatrix, DenseVector, LinearOperator, SparseMatrixCsr, TransposeOperator};

/// Design matrix `X` (`n × p`).
#[derive(Clone, Debug, PartialEq)]
pub enum Design {
    Sparse(SparseMatrixCsr),
    Dense(DenseMatrix),
}

impl Design {
    /// `‖X_{:,j}‖²` for every column.
    pub fn column_norms_sq(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.ncols()];
        match self {
            Design::Sparse(m) => {
                for (_, j, v) in m.triplets() {
                    out[j] += v * v;
                }
            }
            Design::Dense(m) => {
                for i in 0..m.n_rows() {
                    for (o, v) in out.iter_mut().zip(m.row(i)) {
                        *o += v * v;
                    }
                }
            }
        }
        out
    }
}

impl LinearOperator for Design {
    fn nrows(&self) -> usize {
        match self {
            Design::Sparse(m) => m.n_rows(),
            Design::Dense(m) => m.n_rows(),
        }
    }
    fn ncols(&self) -> usize {
        match self {
            Design::Sparse(m) => m.n_cols(),
            Design::Dense(m) => m.n_cols(),
        }
    }
    fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        match self {
            Design::Sparse(m) => m.apply_into(x, y),
            Design::Dense(m) => m.apply_into(x, y),
        }
    }
}

impl TransposeOperator for Design {
    fn apply_transpose_into(&self, x: &[f64], y: &mut [f64]) {
        match self {
            Design::Sparse(m) => m.apply_transpose_into(x, y),
            Design::Dense(m) => m.apply_transpose_into(x, y),
        }
    }
}

impl From<SparseMatrixCsr> for Design {
    fn from(m: SparseMatrixCsr) -> Self {
        Design::Sparse(m)
    }
}

impl From<DenseMatrix> for Design {
    fn from(m: DenseMatrix) -> Self {
        Design::Dense(m)
    }
}

/// Regression model with fixed noise variance and prior precisions.
#[derive(Clone, Debug)]
pub struct RegressionPosterior {
    design: Design,
    response: DenseVector,
    noise_variance: f64,
    prior_precision: DenseVector,
}

impl RegressionPosterior {
    pub fn new(
        design: impl Into<Design>,
        response: DenseVector,
        noise_variance: f64,
        prior_precision: DenseVector,
    ) -> Result<Self> {
        let design = design.into();
        if response.len() != design.nrows() {
            return Err(Error::DimensionMismatch {
                context: "response length vs design rows",
                expected: design.nrows(),
                found: response.len(),
            });
        }
        if prior_precision.len() != design.ncols() {
            return Err(Error::DimensionMismatch {
                context: "prior precision length vs design columns",
                expected: design.ncols(),
                found: prior_precision.len(),
            });
        }
        if !(noise_variance > 0.0) || !noise_variance.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "noise variance must be positive, got {noise_variance}"
            )));
        }
        if let Some((row, &value)) = prior_precision.iter().enumerate().find(|(_, &v)| !(v > 0.0)) {
            return Err(Error::NonPositiveDiagonal { row, value });
        }
        Ok(Self {
            design,
            response,
            noise_variance,
            prior_precision,
        })
    }

    pub fn design(&self) -> &Design {
        &self.design
    }

    pub fn response(&self) -> &DenseVector {
        &self.response
    }

    pub fn noise_variance(&self) -> f64 {
        self.noise_variance
    }

    pub fn prior_precision(&self) -> &DenseVector {
        &self.prior_precision
    }

    pub fn n_observations(&self) -> usize {
        self.design.nrows()
    }

    pub fn n_coefficients(&self) -> usize {
        self.design.ncols()
    }

    /// `diag(Φ) = ‖X_{:,j}‖²/τ² + Λ_j`
    pub fn precision_diagonal(&self) -> Vec<f64> {
        self.design
            .column_norms_sq()
            .into_iter()
            .zip(self.prior_precision.iter())
            .map(|(c, l)| c / self.noise_variance + l)
            .collect()
    }

    /// `Xᵀy/τ²`
    pub fn scaled_xty(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.n_coefficients()];
        self.design.apply_transpose_into(&self.response, &mut out);
        for o in &mut out {
            *o /= self.noise_variance;
        }
        out
    }

    /// `Φ` materialized densely (small `p` only).
    pub fn dense_precision(&self) -> DenseMatrix {
        DenseMatrix::from_operator(&posterior_precision_operator(self)).symmetrized()
    }

    /// `Φ⁻¹Xᵀy/τ²` by dense Cholesky.
    pub fn dense_posterior_mean(&self) -> Result<Vec<f64>> {
        self.dense_precision().solve_spd(&self.scaled_xty())
    }
}

/// `v ↦ Xᵀ(Xv)/τ² + Λ∘v`, never forming `XᵀX`.
#[derive(Clone, Copy, Debug)]
pub struct PosteriorPrecision<'a> {
    post: &'a RegressionPosterior,
}

pub fn posterior_precision_operator(post: &RegressionPosterior) -> PosteriorPrecision<'_> {
    PosteriorPrecision { post }
}

impl LinearOperator for PosteriorPrecision<'_> {
    fn nrows(&self) -> usize {
        self.post.n_coefficients()
    }
    fn ncols(&self) -> usize {
        self.post.n_coefficients()
    }
    fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        let mut xv = vec![0.0; self.post.n_observations()];
        self.post.design.apply_into(x, &mut xv);
        self.post.design.apply_transpose_into(&xv, y);
        let inv_tau2 = 1.0 / self.post.noise_variance;
        for ((yi, xi), li) in y.iter_mut().zip(x).zip(self.post.prior_precision.iter()) {
            *yi = *yi * inv_tau2 + li * xi;
        }
    }
}

/// Seeded stream of standard normal variates.
///
/// ChaCha20 seeded with [`SeedableRng::seed_from_u64`]; normals come from the
/// `rand_distr` ziggurat sampler. The same seed yields the same sequence.
#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    rng: ChaCha20Rng,
    drawn: u64,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            rng: ChaCha20Rng::seed_from_u64(seed),
            drawn: 0,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Number of normal variates produced so far.
    pub fn counter(&self) -> u64 {
        self.drawn
    }

    pub fn standard_normal(&mut self) -> f64 {
        self.drawn += 1;
        StandardNormal.sample(&mut self.rng)
    }

    pub fn fill_standard_normal(&mut self, out: &mut [f64]) {
        for o in out {
            *o = self.standard_normal();
        }
    }
}

/// Preconditioner used for the posterior solve.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PosteriorPreconditioner {
    /// `M = Λ`
    #[default]
    Prior,
    /// `M = diag(Φ)`
    Jacobi,
    None,
}

impl PosteriorPreconditioner {
    pub const ALL: [PosteriorPreconditioner; 3] = [
        PosteriorPreconditioner::Prior,
        PosteriorPreconditioner::Jacobi,
        PosteriorPreconditioner::None,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PosteriorPreconditioner::Prior => "prior",
            PosteriorPreconditioner::Jacobi => "jacobi",
            PosteriorPreconditioner::None => "none",
        }
    }

    fn build(self, post: &RegressionPosterior) -> Result<Box<dyn Preconditioner>> {
        Ok(match self {
            PosteriorPreconditioner::Prior => Box::new(PriorDiagonal::new(&post.prior_precision)?),
            PosteriorPreconditioner::Jacobi => Box::new(Jacobi::from_diagonal(&post.precision_diagonal())?),
            PosteriorPreconditioner::None => Box::new(Identity::new(post.n_coefficients())),
        })
    }
}

impl fmt::Display for PosteriorPreconditioner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PosteriorPreconditioner {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown posterior preconditioner '{s}'")))
    }
}

/// One draw of `β`. Callers must reject draws with `converged == false`.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianDraw {
    pub beta: DenseVector,
    pub solver_iterations: usize,
    pub seed: u64,
    pub converged: bool,
    pub breakdown: Option<Breakdown>,
}

/// Reusable CG-based sampler (preconditioner built once).
pub struct PcgSampler<'a> {
    post: &'a RegressionPosterior,
    precond: Box<dyn Preconditioner>,
    cfg: SolveConfig,
    xty: Vec<f64>,
}

impl<'a> PcgSampler<'a> {
    pub fn new(post: &'a RegressionPosterior, cfg: SolveConfig, precond: PosteriorPreconditioner) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            post,
            precond: precond.build(post)?,
            cfg,
            xty: post.scaled_xty(),
        })
    }

    /// Draws `u` (length `n`) then `v` (length `p`) from `rng` and solves `Φβ = b`.
    pub fn draw(&self, rng: &mut RngStream) -> Result<GaussianDraw> {
        let post = self.post;
        let (n, p) = (post.n_observations(), post.n_coefficients());
        let mut u = vec![0.0; n];
        let mut v = vec![0.0; p];
        rng.fill_standard_normal(&mut u);
        rng.fill_standard_normal(&mut v);

        let mut xtu = vec![0.0; p];
        post.design.apply_transpose_into(&u, &mut xtu);
        let tau = post.noise_variance.sqrt();
        let b: Vec<f64> = (0..p)
            .map(|j| self.xty[j] + xtu[j] / tau + post.prior_precision[j].sqrt() * v[j])
            .collect();
        let b = DenseVector::new(b)?;

        let phi = posterior_precision_operator(post);
        let res = solve_pcg(&phi, &b, &DenseVector::zeros(p), &self.precond, &self.cfg)?;
        Ok(GaussianDraw {
            beta: res.solution,
            solver_iterations: res.iterations,
            seed: rng.seed(),
            converged: res.converged,
            breakdown: res.breakdown,
        })
    }
}

/// One posterior draw via PCG with the prior preconditioner `M = Λ`.
pub fn sample_beta(post: &RegressionPosterior, rng: &mut RngStream, cfg: &SolveConfig) -> Result<GaussianDraw> {
    sample_beta_with(post, rng, cfg, PosteriorPreconditioner::Prior)
}

pub fn sample_beta_with(
    post: &RegressionPosterior,
    rng: &mut RngStream,
    cfg: &SolveConfig,
    precond: PosteriorPreconditioner,
) -> Result<GaussianDraw> {
    PcgSampler::new(post, cfg.clone(), precond)?.draw(rng)
}

/// Largest `p` accepted by the dense Cholesky sampler.
pub const CHOLESKY_ORACLE_MAX_DIM: usize = 500;

/// Exact sampler via dense Cholesky `Φ = LLᵀ`: `β = Φ⁻¹Xᵀy/τ² + L⁻ᵀv`.
pub struct CholeskySampler {
    mean: Vec<f64>,
    factor: DenseMatrix,
}

impl CholeskySampler {
    pub fn new(post: &RegressionPosterior) -> Result<Self> {
        let p = post.n_coefficients();
        if p > CHOLESKY_ORACLE_MAX_DIM {
            return Err(Error::InvalidParameter(format!(
                "dense Cholesky sampler supports p <= {CHOLESKY_ORACLE_MAX_DIM}, got {p}"
            )));
        }
        let phi = post.dense_precision();
        let factor = phi.cholesky()?;
        let mean = factor.solve_lower_transpose(&factor.solve_lower(&post.scaled_xty()));
        Ok(Self { mean, factor })
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    /// Draws `v` (length `p`) from `rng`.
    pub fn draw(&self, rng: &mut RngStream) -> Result<GaussianDraw> {
        let mut v = vec![0.0; self.mean.len()];
        rng.fill_standard_normal(&mut v);
        let noise = self.factor.solve_lower_transpose(&v);
        let beta = self.mean.iter().zip(&noise).map(|(m, e)| m + e).collect();
        Ok(GaussianDraw {
            beta: DenseVector::new(beta)?,
            solver_iterations: 0,
            seed: rng.seed(),
            converged: true,
            breakdown: None,
        })
    }
}

pub fn sample_beta_cholesky_oracle(post: &RegressionPosterior, rng: &mut RngStream) -> Result<GaussianDraw> {
    CholeskySampler::new(post)?.draw(rng)
}

/// `n_sweeps` conditional draws with fixed hyperparameters, all from one stream.
pub fn gibbs_demo(
    post: &RegressionPosterior,
    n_sweeps: usize,
    rng: &mut RngStream,
    cfg: &SolveConfig,
    precond: PosteriorPreconditioner,
) -> Result<Vec<GaussianDraw>> {
    if n_sweeps == 0 {
        return Ok(Vec::new());
    }
    let sampler = PcgSampler::new(post, cfg.clone(), precond)?;
    (0..n_sweeps).map(|_| sampler.draw(rng)).collect()
}
