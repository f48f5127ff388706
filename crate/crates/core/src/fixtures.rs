//! Deterministic test-problem generators shared by tests, benches and the CLI.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::sparse::{DenseMatrix, DenseVector, SparseMatrixCsr};

pub fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

/// 5-point Laplacian on an `m × m` grid with Dirichlet boundary (`n = m²`).
pub fn laplacian_2d(m: usize) -> SparseMatrixCsr {
    let idx = |i: usize, j: usize| i * m + j;
    let mut t = Vec::with_capacity(5 * m * m);
    for i in 0..m {
        for j in 0..m {
            let k = idx(i, j);
            t.push((k, k, 4.0));
            if i > 0 {
                t.push((k, idx(i - 1, j), -1.0));
            }
            if i + 1 < m {
                t.push((k, idx(i + 1, j), -1.0));
            }
            if j > 0 {
                t.push((k, idx(i, j - 1), -1.0));
            }
            if j + 1 < m {
                t.push((k, idx(i, j + 1), -1.0));
            }
        }
    }
    SparseMatrixCsr::from_triplets(m * m, m * m, t).expect("grid stencil is valid")
}

/// 1D Laplacian `tridiag(−1, 2, −1)`.
pub fn laplacian_1d(n: usize) -> SparseMatrixCsr {
    let t = (0..n).flat_map(|i| {
        let mut row = vec![(i, i, 2.0)];
        if i > 0 {
            row.push((i, i - 1, -1.0));
        }
        if i + 1 < n {
            row.push((i, i + 1, -1.0));
        }
        row
    });
    SparseMatrixCsr::from_triplets(n, n, t).expect("stencil is valid")
}

pub fn normal_vec(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| StandardNormal.sample(rng)).collect()
}

pub fn random_vector(rng: &mut impl Rng, n: usize) -> DenseVector {
    DenseVector::new(normal_vec(rng, n)).expect("normal draws are finite")
}

/// `Q diag(eigenvalues) Qᵀ` with `Q` a product of `n` random Householder reflections.
pub fn spd_with_spectrum(rng: &mut impl Rng, eigenvalues: &[f64]) -> DenseMatrix {
    let n = eigenvalues.len();
    let mut a = DenseMatrix::from_diagonal(eigenvalues);
    for _ in 0..n {
        let v = normal_vec(rng, n);
        let norm_sq: f64 = v.iter().map(|x| x * x).sum();
        if norm_sq == 0.0 {
            continue;
        }
        // H A H with H = I − 2vvᵀ/‖v‖²
        let mut av = vec![0.0; n];
        for (i, avi) in av.iter_mut().enumerate() {
            *avi = a.row(i).iter().zip(&v).map(|(x, y)| x * y).sum::<f64>();
        }
        let vav: f64 = v.iter().zip(&av).map(|(x, y)| x * y).sum();
        let beta = 2.0 / norm_sq;
        for i in 0..n {
            for j in 0..n {
                let val = a.get(i, j) - beta * (v[i] * av[j] + av[i] * v[j])
                    + beta * beta * vav * v[i] * v[j];
                a.set(i, j, val);
            }
        }
    }
    a.symmetrized()
}

/// Eigenvalues spanning `[1, kappa]`: both endpoints present, the interior
/// uniformly spread in log scale.
pub fn log_uniform_spectrum(rng: &mut impl Rng, n: usize, kappa: f64) -> Vec<f64> {
    let mut eig: Vec<f64> = (0..n)
        .map(|i| match i {
            0 => 1.0,
            1 => kappa,
            _ => kappa.powf(rng.random::<f64>()),
        })
        .collect();
    eig.sort_by(f64::total_cmp);
    eig
}

/// Dense random SPD matrix with condition number `kappa`.
pub fn random_spd(rng: &mut impl Rng, n: usize, kappa: f64) -> DenseMatrix {
    let eig = log_uniform_spectrum(rng, n, kappa);
    spd_with_spectrum(rng, &eig)
}

/// Diagonal matrix with `n` entries log-spaced over `[1, kappa]`.
pub fn log_spaced_diagonal(n: usize, kappa: f64) -> SparseMatrixCsr {
    let diag: Vec<f64> = (0..n)
        .map(|i| kappa.powf(i as f64 / (n.max(2) - 1) as f64))
        .collect();
    SparseMatrixCsr::from_diagonal(&diag)
}

/// `D A D` with `D = diag(10^{u_i})`, `u_i` uniform in `[−decades, decades]`.
pub fn badly_scaled(rng: &mut impl Rng, a: &DenseMatrix, decades: f64) -> DenseMatrix {
    let n = a.n_rows();
    let d: Vec<f64> = (0..n)
        .map(|_| 10f64.powf(rng.random_range(-decades..=decades)))
        .collect();
    DenseMatrix::from_fn(n, n, |i, j| d[i] * a.get(i, j) * d[j])
}
