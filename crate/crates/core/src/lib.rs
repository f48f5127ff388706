//! Conjugate gradient and preconditioned conjugate gradient for sparse SPD
//! systems, error-bound diagnostics on small instances, and CG-based exact
//! sampling from Gaussian regression posteriors.

pub mod analysis;
pub mod bayes;
pub mod error;
pub mod fixtures;
pub mod io;
pub mod precond;
pub mod solvers;
pub mod sparse;

pub use analysis::{
    check_bound_eq2, check_bound_eq3, predict_cluster_iterations, symmetric_eigenvalues, BoundReport, BoundRow,
    SpectralSummary,
};
pub use bayes::{
    gibbs_demo, posterior_precision_operator, sample_beta, sample_beta_cholesky_oracle, GaussianDraw,
    PosteriorPreconditioner, RegressionPosterior, RngStream,
};
pub use error::{Error, Result};
pub use precond::{PrecondKind, Preconditioner};
pub use solvers::{residual, solve_cg, solve_pcg, Breakdown, IterationTrace, SolveConfig, SolveResult};
pub use sparse::{
    dot, matvec, normal_equations, read_matrix_market, saxpy, write_matrix_market, DenseMatrix, DenseVector,
    LinearOperator, MatrixMarket, SparseMatrixCsr,
};
