//! Independent oracles for the integration tests. Nothing here calls into the
//! code paths it is used to check.

#![allow(dead_code)]

use cgbayes::bayes::RegressionPosterior;
use cgbayes::fixtures;
use cgbayes::{DenseMatrix, DenseVector, SparseMatrixCsr};
use rand::Rng;

/// Row-by-row dense product over a row-major `n_rows × n_cols` array.
pub fn dense_matvec(a: &[f64], n_rows: usize, n_cols: usize, v: &[f64]) -> Vec<f64> {
    (0..n_rows)
        .map(|i| {
            let mut acc = 0.0;
            for j in 0..n_cols {
                acc += a[i * n_cols + j] * v[j];
            }
            acc
        })
        .collect()
}

/// Dense copy built straight from the CSR arrays.
pub fn csr_to_rows(m: &SparseMatrixCsr) -> Vec<f64> {
    let mut out = vec![0.0; m.n_rows() * m.n_cols()];
    for i in 0..m.n_rows() {
        for k in m.row_offsets()[i]..m.row_offsets()[i + 1] {
            out[i * m.n_cols() + m.col_indices()[k]] = m.values()[k];
        }
    }
    out
}

pub fn kahan_dot(x: &[f64], y: &[f64]) -> f64 {
    let mut sum = 0.0;
    let mut c = 0.0;
    for (a, b) in x.iter().zip(y) {
        let term = a * b - c;
        let t = sum + term;
        c = (t - sum) - term;
        sum = t;
    }
    sum
}

/// Determinant via LU with partial pivoting.
pub fn lu_determinant(a: &DenseMatrix) -> f64 {
    let n = a.n_rows();
    let mut m = a.values().to_vec();
    let mut det = 1.0;
    for k in 0..n {
        let piv = (k..n)
            .max_by(|&i, &j| m[i * n + k].abs().total_cmp(&m[j * n + k].abs()))
            .unwrap();
        if m[piv * n + k] == 0.0 {
            return 0.0;
        }
        if piv != k {
            for j in 0..n {
                m.swap(k * n + j, piv * n + j);
            }
            det = -det;
        }
        let d = m[k * n + k];
        det *= d;
        for i in k + 1..n {
            let f = m[i * n + k] / d;
            for j in k..n {
                m[i * n + j] -= f * m[k * n + j];
            }
        }
    }
    det
}

/// Log-determinant via the same LU, accumulated as a sum of logs.
pub fn lu_log_abs_determinant(a: &DenseMatrix) -> f64 {
    let n = a.n_rows();
    let mut m = a.values().to_vec();
    let mut logdet = 0.0;
    for k in 0..n {
        let piv = (k..n)
            .max_by(|&i, &j| m[i * n + k].abs().total_cmp(&m[j * n + k].abs()))
            .unwrap();
        if piv != k {
            for j in 0..n {
                m.swap(k * n + j, piv * n + j);
            }
        }
        let d = m[k * n + k];
        logdet += d.abs().ln();
        for i in k + 1..n {
            let f = m[i * n + k] / d;
            for j in k..n {
                m[i * n + j] -= f * m[k * n + j];
            }
        }
    }
    logdet
}

/// Gaussian elimination solve with partial pivoting (independent of Cholesky).
pub fn gauss_solve(a: &DenseMatrix, b: &[f64]) -> Vec<f64> {
    let n = a.n_rows();
    let mut m = a.values().to_vec();
    let mut x = b.to_vec();
    for k in 0..n {
        let piv = (k..n)
            .max_by(|&i, &j| m[i * n + k].abs().total_cmp(&m[j * n + k].abs()))
            .unwrap();
        if piv != k {
            for j in 0..n {
                m.swap(k * n + j, piv * n + j);
            }
            x.swap(k, piv);
        }
        for i in k + 1..n {
            let f = m[i * n + k] / m[k * n + k];
            for j in k..n {
                m[i * n + j] -= f * m[k * n + j];
            }
            x[i] -= f * x[k];
        }
    }
    for i in (0..n).rev() {
        let mut s = x[i];
        for j in i + 1..n {
            s -= m[i * n + j] * x[j];
        }
        x[i] = s / m[i * n + i];
    }
    x
}

/// Gauss-Jordan inverse (independent of Cholesky).
pub fn gauss_inverse(a: &DenseMatrix) -> DenseMatrix {
    let n = a.n_rows();
    let mut cols = Vec::with_capacity(n);
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        cols.push(gauss_solve(a, &e));
    }
    DenseMatrix::from_fn(n, n, |i, j| cols[j][i])
}

/// `XᵀX/τ² + diag(Λ)` by explicit triple loop.
pub fn explicit_precision(x: &DenseMatrix, tau2: f64, lambda: &[f64]) -> DenseMatrix {
    let (n, p) = (x.n_rows(), x.n_cols());
    DenseMatrix::from_fn(p, p, |i, j| {
        let mut s = 0.0;
        for k in 0..n {
            s += x.get(k, i) * x.get(k, j);
        }
        s / tau2 + if i == j { lambda[i] } else { 0.0 }
    })
}

pub fn rel_err_inf(a: &[f64], b: &[f64]) -> f64 {
    let num = a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let den = b.iter().map(|v| v.abs()).fold(0.0, f64::max);
    if den == 0.0 {
        num
    } else {
        num / den
    }
}

/// Random sparse symmetric, strictly diagonally dominant (hence SPD) matrix.
pub fn random_sparse_spd(rng: &mut impl Rng, n: usize, density: f64) -> SparseMatrixCsr {
    let mut off = Vec::new();
    let mut row_abs = vec![0.0; n];
    for i in 0..n {
        for j in 0..i {
            if rng.random::<f64>() < density {
                let v: f64 = rng.random_range(-1.0..1.0);
                off.push((i, j, v));
                off.push((j, i, v));
                row_abs[i] += v.abs();
                row_abs[j] += v.abs();
            }
        }
    }
    let diag = (0..n).map(|i| (i, i, row_abs[i] + rng.random_range(0.1..1.0)));
    SparseMatrixCsr::from_triplets(n, n, off.into_iter().chain(diag)).unwrap()
}

/// Dense random SPD with condition number `kappa`, as CSR.
pub fn random_spd_csr(rng: &mut impl Rng, n: usize, kappa: f64) -> (DenseMatrix, SparseMatrixCsr) {
    let a = fixtures::random_spd(rng, n, kappa);
    let csr = SparseMatrixCsr::from_dense(&a);
    (a, csr)
}

pub fn vec_of(values: Vec<f64>) -> DenseVector {
    DenseVector::new(values).unwrap()
}

/// The fixed `n = 5`, `p = 2` regression fixture.
pub fn tiny_posterior() -> RegressionPosterior {
    let x = DenseMatrix::new(
        5,
        2,
        vec![1.0, 0.3, -0.5, 1.2, 0.8, -0.7, 1.5, 0.2, -0.4, 0.9],
    )
    .unwrap();
    let y = vec_of(vec![1.1, 0.4, -0.6, 2.0, 0.3]);
    RegressionPosterior::new(x, y, 0.8, vec_of(vec![0.5, 2.0])).unwrap()
}

/// Strong-shrinkage fixture: `n = 100`, `p = 500`, `X` standard normal, `τ² = 1`,
/// `Λ` heavy tailed (90% of entries `1e3`, 10% `1e-2`).
pub fn shrinkage_posterior(seed: u64) -> RegressionPosterior {
    let (n, p) = (100, 500);
    let mut rng = fixtures::rng(seed);
    let x = DenseMatrix::new(n, p, fixtures::normal_vec(&mut rng, n * p)).unwrap();
    let beta_true: Vec<f64> = (0..p).map(|j| if j % 10 == 0 { 2.0 } else { 0.0 }).collect();
    let mut y = vec![0.0; n];
    for i in 0..n {
        y[i] = (0..p).map(|j| x.get(i, j) * beta_true[j]).sum::<f64>();
    }
    let noise = fixtures::normal_vec(&mut rng, n);
    for (yi, e) in y.iter_mut().zip(noise) {
        *yi += e;
    }
    let lambda: Vec<f64> = (0..p).map(|j| if j % 10 == 0 { 1e-2 } else { 1e3 }).collect();
    RegressionPosterior::new(x, vec_of(y), 1.0, vec_of(lambda)).unwrap()
}

/// Two-sample energy statistic for equal-size samples of `d`-vectors, up to a
/// positive constant: `3·B − T`, where `B` sums distances across groups and `T`
/// sums all pairwise distances.
fn energy_between(points: &[Vec<f64>], labels: &[f64]) -> f64 {
    let n = points.len();
    let d = points[0].len();
    let flat: Vec<f64> = points.iter().flatten().copied().collect();
    let mut between = 0.0;
    for i in 0..n {
        let pi = &flat[i * d..(i + 1) * d];
        let li = labels[i];
        let mut acc = 0.0;
        for j in i + 1..n {
            let pj = &flat[j * d..(j + 1) * d];
            let mut s = 0.0;
            for k in 0..d {
                let t = pi[k] - pj[k];
                s += t * t;
            }
            let dl = li - labels[j];
            acc += s.sqrt() * dl * dl;
        }
        between += acc;
    }
    between
}

/// Permutation p-value of the energy-distance two-sample test (equal sizes).
pub fn energy_permutation_pvalue(x: &[Vec<f64>], y: &[Vec<f64>], permutations: usize, seed: u64) -> f64 {
    assert_eq!(x.len(), y.len());
    let pooled: Vec<Vec<f64>> = x.iter().chain(y).cloned().collect();
    let n = pooled.len();
    let mut labels: Vec<f64> = (0..n).map(|i| if i < x.len() { 0.0 } else { 1.0 }).collect();
    // 3B − T is monotone in B, and T is permutation invariant.
    let observed = energy_between(&pooled, &labels);
    let mut rng = fixtures::rng(seed);
    let mut exceed = 0usize;
    for _ in 0..permutations {
        for i in (1..n).rev() {
            let j = rng.random_range(0..=i);
            labels.swap(i, j);
        }
        if energy_between(&pooled, &labels) >= observed {
            exceed += 1;
        }
    }
    (1 + exceed) as f64 / (1 + permutations) as f64
}

pub fn mean_and_cov(draws: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = draws.len() as f64;
    let p = draws[0].len();
    let mut mean = vec![0.0; p];
    for d in draws {
        for (m, v) in mean.iter_mut().zip(d) {
            *m += v;
        }
    }
    for m in &mut mean {
        *m /= n;
    }
    let mut cov = vec![vec![0.0; p]; p];
    for d in draws {
        for i in 0..p {
            for j in 0..p {
                cov[i][j] += (d[i] - mean[i]) * (d[j] - mean[j]);
            }
        }
    }
    for row in &mut cov {
        for c in row.iter_mut() {
            *c /= n - 1.0;
        }
    }
    (mean, cov)
}

pub fn median(v: &mut [usize]) -> f64 {
    v.sort_unstable();
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2] as f64
    } else {
        (v[n / 2 - 1] + v[n / 2]) as f64 / 2.0
    }
}
