use std::path::PathBuf;

/// Errors raised by construction, I/O and validation.
///
/// Solver breakdowns are not errors: they are reported on
/// [`SolveResult`](crate::solvers::SolveResult) so the last iterate stays available.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("non-finite value {value} at position {index}")]
    NonFinite { index: usize, value: f64 },

    #[error("vector must have at least one entry")]
    EmptyVector,

    #[error("invalid CSR structure: {0}")]
    InvalidCsr(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("non-positive diagonal entry {value} in row {row}")]
    NonPositiveDiagonal { row: usize, value: f64 },

    #[error("incomplete Cholesky broke down at row {row} after {attempts} attempts (last shift {shift})")]
    FactorizationBreakdown {
        row: usize,
        attempts: usize,
        shift: f64,
    },

    #[error("dense Cholesky failed: pivot {pivot} at row {row}")]
    NotPositiveDefinite { row: usize, pivot: f64 },

    #[error("matrix is not symmetric (max |a_ij - a_ji| = {max_asymmetry})")]
    NotSymmetric { max_asymmetry: f64 },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("Jacobi eigenvalue iteration did not converge after {sweeps} sweeps")]
    EigenNoConvergence { sweeps: usize },

    #[error("trace does not contain iterate vectors; solve with record_vectors enabled")]
    MissingTraceVectors,

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
