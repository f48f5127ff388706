use std::fmt::Write as _;
use std::path::PathBuf;

use clap::Args;

use cgbayes::analysis::BoundRow;
use cgbayes::io::read_vector_csv;
use cgbayes::{check_bound_eq2, check_bound_eq3, solve_cg, symmetric_eigenvalues, DenseVector, SolveConfig};

use crate::error::{emit, require_file, CliError, Result};
use crate::solve::load_square;
use crate::Status;

/// The bound check densifies A and runs a Jacobi eigensolver.
const MAX_DENSE_DIM: usize = 1000;

#[derive(Args, Debug)]
pub struct BoundsArgs {
    /// Matrix Market file holding the SPD matrix A.
    #[arg(long)]
    pub matrix: PathBuf,
    /// Right-hand side b as headerless CSV (default: all ones).
    #[arg(long)]
    pub rhs: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-10)]
    pub rel_tol: f64,
    /// Iteration cap (default: 10n).
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// Where to write the CSV table (default: standard output).
    #[arg(long)]
    pub output: Option<PathBuf>,
}

fn cell(row: Option<&BoundRow>, f: impl Fn(&BoundRow) -> f64) -> String {
    row.map_or_else(|| "NA".to_string(), |r| format!("{:e}", f(r)))
}

pub fn run(args: BoundsArgs) -> Result<Status> {
    require_file(&args.matrix)?;
    if let Some(p) = &args.rhs {
        require_file(p)?;
    }
    let a = load_square(&args.matrix)?;
    let n = a.n_rows();
    if n > MAX_DENSE_DIM {
        return Err(CliError::Usage(format!("bounds supports n <= {MAX_DENSE_DIM}, got {n}")));
    }
    let b = match &args.rhs {
        Some(p) => read_vector_csv(p)?,
        None => DenseVector::filled(n, 1.0),
    };
    if b.len() != n {
        return Err(CliError::Usage(format!("rhs has {} entries, matrix has {n} rows", b.len())));
    }

    let dense = a.to_dense();
    let spectrum = symmetric_eigenvalues(&dense)?;
    let x_star = dense.solve_spd(&b)?;
    let cfg = SolveConfig {
        rel_tolerance: args.rel_tol,
        max_iterations: args.max_iter,
        ..SolveConfig::default()
    }
    .with_vectors();
    let res = solve_cg(&a, &b, &DenseVector::zeros(n), &cfg)?;
    let trace = res.trace.as_ref().expect("trace requested");
    let eq2 = check_bound_eq2(trace, &x_star, &spectrum, &a)?;
    let eq3 = check_bound_eq3(trace, &x_star, &spectrum, &a)?;

    let mut out = String::from("k,residual_norm,eq2_lhs,eq2_rhs,eq3_lhs,eq3_rhs,satisfied\n");
    let mut violated = 0;
    for rec in &trace.records {
        let k = rec.iteration;
        let r2 = eq2.rows.iter().find(|r| r.iterate == k);
        let r3 = eq3.rows.iter().find(|r| r.iterate == k);
        let satisfied = match (r2, r3) {
            (None, None) => "NA".to_string(),
            _ => {
                let ok = r2.is_none_or(|r| r.satisfied) && r3.is_none_or(|r| r.satisfied);
                if !ok {
                    violated += 1;
                }
                ok.to_string()
            }
        };
        let _ = writeln!(
            out,
            "{k},{:e},{},{},{},{},{satisfied}",
            rec.residual_norm,
            cell(r2, |r| r.lhs),
            cell(r2, |r| r.rhs),
            cell(r3, |r| r.lhs),
            cell(r3, |r| r.rhs),
        );
    }
    emit(args.output.as_deref(), &out)?;
    eprintln!(
        "kappa = {:.6e}, {} iterations, {violated} rows with a violated bound",
        spectrum.condition_number(),
        res.iterations
    );
    Ok(Status::Converged)
}
