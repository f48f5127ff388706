//! Shared benchmark inputs.

use cgbayes::fixtures::{normal_vec, rng};
use cgbayes::{matvec, DenseVector, RegressionPosterior, SparseMatrixCsr};

/// Right-hand side `A·1`.
pub fn ones_rhs(a: &SparseMatrixCsr) -> DenseVector {
    matvec(a, &DenseVector::filled(a.n_rows(), 1.0)).expect("square matrix")
}

/// Sparse Gaussian design with about `density · n · p` nonzeros and a shrinkage prior.
pub fn shrinkage_posterior(n: usize, p: usize, density: f64, seed: u64) -> RegressionPosterior {
    let mut r = rng(seed);
    let stride = (1.0 / density).round().max(1.0) as usize;
    let values = normal_vec(&mut r, n * p);
    let triplets = (0..n)
        .flat_map(|i| (0..p).map(move |j| (i, j)))
        .zip(values)
        .filter(|&((i, j), _)| (i * p + j) % stride == i % stride)
        .map(|((i, j), v)| (i, j, v));
    let x = SparseMatrixCsr::from_triplets(n, p, triplets).expect("indices in range");
    let y = DenseVector::new(normal_vec(&mut r, n)).expect("finite");
    let lambda: Vec<f64> = (0..p).map(|j| if j % 10 == 0 { 1e-2 } else { 1e3 }).collect();
    RegressionPosterior::new(x, y, 1.0, DenseVector::new(lambda).expect("finite")).expect("consistent sizes")
}
