use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::Args;

use cgbayes::sparse::{matvec, SparseMatrixCsr};
use cgbayes::{precond, solve_pcg, DenseVector, PrecondKind, SolveConfig};

use crate::error::{emit, CliError, Result};
use crate::solve::load_square;
use crate::Status;

/// Preconditioners that need nothing beyond the matrix.
const KINDS: [PrecondKind; 4] = [
    PrecondKind::Identity,
    PrecondKind::Jacobi,
    PrecondKind::Ssor,
    PrecondKind::IncompleteCholesky,
];

#[derive(Args, Debug)]
pub struct BenchArgs {
    /// Directory of Matrix Market (.mtx) files.
    #[arg(long)]
    pub corpus: PathBuf,
    /// Where to write the CSV table (default: standard output).
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-8)]
    pub rel_tol: f64,
    /// Iteration cap (default: 10n).
    #[arg(long)]
    pub max_iter: Option<usize>,
}

struct Row {
    matrix: String,
    n: usize,
    nnz: usize,
    kind: PrecondKind,
    iterations: Option<usize>,
    wall_ms: f64,
    final_rel_residual: Option<f64>,
}

fn corpus_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let entries = std::fs::read_dir(dir).map_err(|e| CliError::io(dir, e))?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x.eq_ignore_ascii_case("mtx")))
        .collect();
    files.sort();
    Ok(files)
}

fn bench_matrix(name: &str, a: &SparseMatrixCsr, cfg: &SolveConfig) -> Vec<Row> {
    let n = a.n_rows();
    // b = A·1, so the exact solution is known
    let b = matvec(a, &DenseVector::filled(n, 1.0)).expect("square matrix");
    let x0 = DenseVector::zeros(n);
    KINDS
        .iter()
        .map(|&kind| {
            let start = Instant::now();
            let outcome = precond::build(kind, a, 1.0, None).and_then(|m| solve_pcg(a, &b, &x0, &m, cfg));
            let wall_ms = start.elapsed().as_secs_f64() * 1e3;
            let (iterations, final_rel_residual) = match outcome {
                Ok(res) => (Some(res.iterations), Some(res.final_rel_residual)),
                Err(err) => {
                    eprintln!("warning: {name} with {kind}: {err}");
                    (None, None)
                }
            };
            Row { matrix: name.to_string(), n, nnz: a.nnz(), kind, iterations, wall_ms, final_rel_residual }
        })
        .collect()
}

pub fn run(args: BenchArgs) -> Result<Status> {
    if !args.corpus.is_dir() {
        return Err(CliError::Usage(format!("corpus directory not found: {}", args.corpus.display())));
    }
    let cfg = SolveConfig {
        rel_tolerance: args.rel_tol,
        max_iterations: args.max_iter,
        ..SolveConfig::default()
    };
    cfg.validate()?;

    let mut rows = Vec::new();
    for path in corpus_files(&args.corpus)? {
        let name = path.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        match load_square(&path) {
            Ok(a) => rows.extend(bench_matrix(&name, &a, &cfg)),
            Err(err) => eprintln!("warning: skipping {}: {err}", path.display()),
        }
    }
    if rows.is_empty() {
        return Err(CliError::Usage(format!("no readable matrices in {}", args.corpus.display())));
    }
    rows.sort_by(|x, y| x.matrix.cmp(&y.matrix).then(x.kind.as_str().cmp(y.kind.as_str())));

    let na = || "NA".to_string();
    let mut out = String::from("matrix,n,nnz,preconditioner,iterations,wall_time_ms,final_rel_residual\n");
    for r in &rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{:.3},{}",
            r.matrix,
            r.n,
            r.nnz,
            r.kind,
            r.iterations.map_or_else(na, |v| v.to_string()),
            r.wall_ms,
            r.final_rel_residual.map_or_else(na, |v| format!("{v:e}")),
        );
    }
    emit(args.output.as_deref(), &out)?;
    Ok(Status::Converged)
}
