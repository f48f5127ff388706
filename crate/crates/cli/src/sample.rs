use std::collections::hash_map::RandomState;
use std::fmt::Write as _;
use std::hash::{BuildHasher, Hasher};
use std::path::PathBuf;

use clap::Args;
use serde_json::{json, Map, Value};

use cgbayes::bayes::{Design, PcgSampler};
use cgbayes::io::read_vector_csv;
use cgbayes::sparse::MatrixMarket;
use cgbayes::{read_matrix_market, GaussianDraw, PosteriorPreconditioner, RegressionPosterior, RngStream, SolveConfig};

use crate::error::{emit, require_file, CliError, Result};
use crate::Status;

#[derive(Args, Debug)]
pub struct SampleArgs {
    /// Design matrix X (n × p) in Matrix Market format.
    #[arg(long)]
    pub design: PathBuf,
    /// Response y (length n) as headerless CSV.
    #[arg(long)]
    pub response: PathBuf,
    /// Noise variance τ².
    #[arg(long)]
    pub tau2: f64,
    /// Prior precision diagonal Λ (length p) as headerless CSV.
    #[arg(long)]
    pub lambda: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub draws: usize,
    /// Seed for all randomness; a fresh one is generated and printed if absent.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Preconditioner for the posterior system: prior, jacobi or none.
    #[arg(long, default_value = "prior")]
    pub precond: PosteriorPreconditioner,
    #[arg(long, default_value_t = 1e-10)]
    pub rel_tol: f64,
    /// Re-run the same seed with every preconditioner and report iteration counts.
    #[arg(long)]
    pub compare: bool,
    /// Where to write the draws, one comma-separated row per draw.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Where to write the JSON summary (default: standard output).
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

fn fresh_seed() -> u64 {
    RandomState::new().build_hasher().finish()
}

fn run_chain(post: &RegressionPosterior, cfg: &SolveConfig, kind: PosteriorPreconditioner, seed: u64, draws: usize) -> Result<Vec<GaussianDraw>> {
    let sampler = PcgSampler::new(post, cfg.clone(), kind)?;
    let mut rng = RngStream::new(seed);
    (0..draws).map(|_| sampler.draw(&mut rng).map_err(CliError::from)).collect()
}

fn iteration_stats(draws: &[GaussianDraw]) -> Value {
    let mut its: Vec<usize> = draws.iter().map(|d| d.solver_iterations).collect();
    its.sort_unstable();
    let n = its.len();
    let median = if n % 2 == 1 { its[n / 2] as f64 } else { (its[n / 2 - 1] + its[n / 2]) as f64 / 2.0 };
    json!({
        "median": median,
        "mean": its.iter().sum::<usize>() as f64 / n as f64,
        "min": its[0],
        "max": its[n - 1],
    })
}

pub fn run(args: SampleArgs) -> Result<Status> {
    for p in [&args.design, &args.response, &args.lambda] {
        require_file(p)?;
    }
    if args.draws == 0 {
        return Err(CliError::Usage("--draws must be at least 1".into()));
    }
    let seed = match args.seed {
        Some(s) => s,
        None => {
            let s = fresh_seed();
            eprintln!("seed: {s}");
            s
        }
    };
    let design: Design = match read_matrix_market(&args.design)? {
        MatrixMarket::Sparse(m) => m.into(),
        MatrixMarket::Dense(m) => m.into(),
    };
    let post = RegressionPosterior::new(design, read_vector_csv(&args.response)?, args.tau2, read_vector_csv(&args.lambda)?)?;
    let cfg = SolveConfig::default().with_rel_tolerance(args.rel_tol);

    let draws = run_chain(&post, &cfg, args.precond, seed, args.draws)?;
    let unconverged = draws.iter().filter(|d| !d.converged).count();

    if let Some(path) = &args.output {
        let mut out = String::new();
        for d in &draws {
            let row: Vec<String> = d.beta.iter().map(|v| format!("{v:e}")).collect();
            let _ = writeln!(out, "{}", row.join(","));
        }
        emit(Some(path), &out)?;
    }

    let p = post.n_coefficients();
    let mut mean = vec![0.0; p];
    for d in &draws {
        for (m, v) in mean.iter_mut().zip(d.beta.iter()) {
            *m += v / draws.len() as f64;
        }
    }
    let mut summary = json!({
        "draws": draws.len(),
        "seed": seed,
        "preconditioner": args.precond.as_str(),
        "n_observations": post.n_observations(),
        "n_coefficients": p,
        "iterations": iteration_stats(&draws),
        "unconverged": unconverged,
        "sample_mean": mean,
    });
    if args.compare {
        let mut cmp = Map::new();
        for kind in PosteriorPreconditioner::ALL {
            let chain = if kind == args.precond { draws.clone() } else { run_chain(&post, &cfg, kind, seed, args.draws)? };
            cmp.insert(kind.as_str().to_string(), iteration_stats(&chain));
        }
        summary["compare"] = Value::Object(cmp);
    }
    emit(args.summary.as_deref(), &format!("{summary:#}\n"))?;

    if unconverged > 0 {
        eprintln!("{unconverged} draws did not reach the solver tolerance and must be discarded");
        return Ok(Status::Breakdown);
    }
    Ok(Status::Converged)
}
