//! Storage formats, level-1 kernels, the operator abstraction and Matrix Market I/O.

pub mod csr;
pub mod dense;
pub mod mtx;
pub mod operator;
pub mod vector;

pub use csr::SparseMatrixCsr;
pub use dense::DenseMatrix;
pub use mtx::{read_matrix_market, write_matrix_market, write_matrix_market_dense, MatrixMarket, Symmetry};
pub use operator::{
    matvec, matvec_transpose, normal_equations, CountingOperator, LinearOperator, NormalOperator,
    TransposeOperator,
};
pub use vector::{dot, saxpy, DenseVector};
