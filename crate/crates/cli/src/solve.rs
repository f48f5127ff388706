use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::Args;
use serde_json::json;

use cgbayes::io::{read_vector_csv, write_vector_csv};
use cgbayes::sparse::SparseMatrixCsr;
use cgbayes::{precond, read_matrix_market, solve_pcg, Breakdown, DenseVector, Error, PrecondKind, SolveConfig};

use crate::error::{emit, require_file, CliError, Result};
use crate::Status;

#[derive(Args, Debug)]
pub struct SolveArgs {
    /// Matrix Market file holding the SPD matrix A.
    #[arg(long)]
    pub matrix: PathBuf,
    /// Right-hand side b as headerless CSV (default: all ones).
    #[arg(long)]
    pub rhs: Option<PathBuf>,
    /// Starting iterate as headerless CSV (default: zero).
    #[arg(long)]
    pub x0: Option<PathBuf>,
    /// Preconditioner: none, jacobi, ssor, ic0, prior or exact.
    #[arg(long, default_value = "none")]
    pub precond: PrecondKind,
    /// Relaxation parameter for ssor, in (0, 2).
    #[arg(long, default_value_t = 1.0)]
    pub ssor_omega: f64,
    /// Prior precision diagonal as headerless CSV (required by --precond prior).
    #[arg(long)]
    pub lambda: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-10)]
    pub rel_tol: f64,
    #[arg(long, default_value_t = 0.0)]
    pub abs_tol: f64,
    /// Iteration cap (default: 10n).
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// Where to write the solution CSV.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Where to write the JSON report (default: standard output).
    #[arg(long)]
    pub report: Option<PathBuf>,
}

pub fn load_square(path: &Path) -> Result<SparseMatrixCsr> {
    let a = read_matrix_market(path)?.into_csr();
    if a.n_rows() != a.n_cols() {
        return Err(Error::NotSquare { rows: a.n_rows(), cols: a.n_cols() }.into());
    }
    Ok(a)
}

fn check_len(what: &str, v: &DenseVector, n: usize) -> Result<()> {
    if v.len() != n {
        return Err(CliError::Usage(format!("{what} has {} entries, matrix has {n} rows", v.len())));
    }
    Ok(())
}

pub fn run(args: SolveArgs) -> Result<Status> {
    for p in [Some(&args.matrix), args.rhs.as_ref(), args.x0.as_ref(), args.lambda.as_ref()].into_iter().flatten() {
        require_file(p)?;
    }
    if args.precond == PrecondKind::PriorDiagonal && args.lambda.is_none() {
        return Err(CliError::Usage("--precond prior requires --lambda".into()));
    }
    let cfg = SolveConfig {
        rel_tolerance: args.rel_tol,
        abs_tolerance: args.abs_tol,
        max_iterations: args.max_iter,
        ..SolveConfig::default()
    };
    cfg.validate()?;

    let a = load_square(&args.matrix)?;
    let n = a.n_rows();
    let b = match &args.rhs {
        Some(p) => read_vector_csv(p)?,
        None => DenseVector::filled(n, 1.0),
    };
    check_len("rhs", &b, n)?;
    let x0 = match &args.x0 {
        Some(p) => read_vector_csv(p)?,
        None => DenseVector::zeros(n),
    };
    check_len("x0", &x0, n)?;
    let lambda = args.lambda.as_deref().map(read_vector_csv).transpose()?;
    if let Some(l) = &lambda {
        check_len("lambda", l, n)?;
    }

    let start = Instant::now();
    let m = match precond::build(args.precond, &a, args.ssor_omega, lambda.as_deref()) {
        Ok(m) => m,
        Err(err @ (Error::FactorizationBreakdown { .. } | Error::NonPositiveDiagonal { .. } | Error::NotPositiveDefinite { .. })) => {
            let name = match err {
                Error::NotPositiveDefinite { .. } => "NotPositiveDefinite",
                _ => "PreconditionerBreakdown",
            };
            let report = json!({
                "iterations": 0,
                "converged": false,
                "final_rel_residual": serde_json::Value::Null,
                "wall_time_ms": start.elapsed().as_secs_f64() * 1e3,
                "breakdown": name,
                "preconditioner": args.precond.as_str(),
                "message": err.to_string(),
            });
            emit(args.report.as_deref(), &format!("{report:#}\n"))?;
            eprintln!("breakdown: {err}");
            return Ok(Status::Breakdown);
        }
        Err(err) => return Err(err.into()),
    };
    let res = solve_pcg(&a, &b, &x0, &m, &cfg)?;
    let wall_ms = start.elapsed().as_secs_f64() * 1e3;

    if let Some(p) = &args.output {
        write_vector_csv(p, &res.solution)?;
    }
    let report = json!({
        "iterations": res.iterations,
        "converged": res.converged,
        "final_rel_residual": res.final_rel_residual,
        "wall_time_ms": wall_ms,
        "breakdown": res.breakdown.as_ref().map(Breakdown::name),
        "preconditioner": args.precond.as_str(),
    });
    emit(args.report.as_deref(), &format!("{report:#}\n"))?;

    Ok(match &res.breakdown {
        None => Status::Converged,
        Some(Breakdown::MaxIterationsExceeded { .. }) => Status::MaxIterations,
        Some(other) => {
            eprintln!("breakdown: {other}");
            Status::Breakdown
        }
    })
}
