//! Command-line front end: ensemble generation, solver runs, diagnostics
//! suites and barrier sweeps.
//!
//! Exit codes: 0 success, 1 runtime or domain error (also a failing
//! diagnostics suite), 2 usage error. Errors are printed to standard error
//! as a single JSON object `{"error": kind, "message": text}`.

// `!(x > 0.0)` style guards reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;

use std::ffi::OsString;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use config::{RunConfig, SolverFlags};
use error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "expgrad", version, about = "Exponentiated gradient solver with Armijo line search")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a random PSD measurement ensemble as JSON.
    Gen {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        num_ops: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve one instance from the maximally mixed state.
    Run {
        /// JSON file with the same keys as the flags; flags win.
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        run: RunConfig,
    },
    /// Run a diagnostics suite over seeded random probes.
    Diagnose {
        /// One of sandwich, ratio, moments, kappa, fixed-point, self-concordance, all.
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Hedged solves for a descending list of barrier weights.
    LambdaSweep {
        #[arg(long)]
        operators: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        lambdas: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Sweep points solved concurrently.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[command(flatten)]
        solver: SolverFlags,
    },
}

pub fn execute(cli: Cli) -> CliResult<i32> {
    match cli.command {
        Command::Gen { dim, num_ops, seed, out } => commands::gen(dim, num_ops, seed, &out).map(|_| 0),
        Command::Run { config, run } => commands::run(run, config.as_deref()).map(|_| 0),
        Command::Diagnose { suite, samples, seed, report, jobs } => {
            let pass = commands::diagnose(&suite, samples, seed, jobs, report.as_deref())?;
            Ok(if pass { 0 } else { 1 })
        }
        Command::LambdaSweep { operators, lambdas, out, jobs, solver } => {
            commands::sweep(&operators, &lambdas, &solver, jobs, out.as_ref()).map(|_| 0)
        }
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // help and version; a closed pipe is not an error here
            let _ = write!(io::stdout(), "{e}");
            return 0;
        }
        Err(e) => {
            let message = e.render().to_string();
            eprintln!("{}", CliError::Usage(message.trim().to_string()).to_json());
            return 2;
        }
    };
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("{}", e.to_json());
            e.exit_code()
        }
    }
}
