mod bench;
mod bounds;
mod error;
mod sample;
mod solve;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::error::CliError;

/// Conjugate gradient solvers, convergence-bound checks and CG-based
/// posterior sampling.
#[derive(Parser)]
#[command(name = "cgbayes", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve Ax = b for a symmetric positive-definite Matrix Market matrix.
    Solve(solve::SolveArgs),
    /// Run CG and tabulate both convergence bounds at every iteration.
    Bounds(bounds::BoundsArgs),
    /// Draw coefficients from the conditional Gaussian regression posterior.
    Sample(sample::SampleArgs),
    /// Compare preconditioners over a directory of Matrix Market files.
    Bench(bench::BenchArgs),
}

/// Process exit status. The numeric values are part of the interface.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Converged = 0,
    Breakdown = 2,
    MaxIterations = 3,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve(args) => solve::run(args),
        Command::Bounds(args) => bounds::run(args),
        Command::Sample(args) => sample::run(args),
        Command::Bench(args) => bench::run(args),
    };
    match result {
        Ok(status) => ExitCode::from(status as u8),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(CliError::EXIT_CODE)
        }
    }
}
