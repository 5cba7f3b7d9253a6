//! Run configuration assembled from a JSON file and command-line flags.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use expgrad::SolverConfig;
use serde::Deserialize;

use crate::error::{at_path, usage, CliResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ObjectiveKind {
    Qst,
    HedgedQst,
    Burg,
    Poisson,
    Quadratic,
}

/// Solver knobs shared by `run` and `lambda-sweep`.
#[derive(Clone, Debug, Default, PartialEq, Args)]
pub struct SolverFlags {
    #[arg(long)]
    pub alpha_bar: Option<f64>,
    #[arg(long)]
    pub shrink: Option<f64>,
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    #[arg(long)]
    pub max_backtracks: Option<usize>,
    #[arg(long)]
    pub tol: Option<f64>,
}

impl SolverFlags {
    /// Fields set here win over `base`.
    pub fn or(self, base: SolverFlags) -> SolverFlags {
        SolverFlags {
            alpha_bar: self.alpha_bar.or(base.alpha_bar),
            shrink: self.shrink.or(base.shrink),
            tau: self.tau.or(base.tau),
            max_iter: self.max_iter.or(base.max_iter),
            max_backtracks: self.max_backtracks.or(base.max_backtracks),
            tol: self.tol.or(base.tol),
        }
    }

    pub fn to_config(&self) -> CliResult<SolverConfig> {
        let d = SolverConfig::default();
        let cfg = SolverConfig {
            alpha_bar: self.alpha_bar.unwrap_or(d.alpha_bar),
            shrink: self.shrink.unwrap_or(d.shrink),
            tau: self.tau.unwrap_or(d.tau),
            max_iters: self.max_iter.unwrap_or(d.max_iters),
            max_backtracks: self.max_backtracks.unwrap_or(d.max_backtracks),
            stop_tol: self.tol.unwrap_or(d.stop_tol),
            eig_floor: d.eig_floor,
        };
        cfg.validate().map_err(|e| usage(e.to_string()))?;
        Ok(cfg)
    }
}

/// Everything `run` accepts.
#[derive(Clone, Debug, Default, PartialEq, Args)]
pub struct RunConfig {
    #[arg(long, value_enum)]
    pub objective: Option<ObjectiveKind>,
    /// Measurement ensemble JSON (qst, hedged-qst, poisson).
    #[arg(long)]
    pub operators: Option<PathBuf>,
    /// Barrier weight for hedged-qst.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Dimension for burg and quadratic when no operators are given.
    #[arg(long)]
    pub dim: Option<usize>,
    /// Curvature `L` of the quadratic objective.
    #[arg(long)]
    pub scale: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub trace: Option<PathBuf>,
    #[arg(long)]
    pub summary: Option<PathBuf>,
    #[command(flatten)]
    pub solver: SolverFlags,
}

/// On-disk form of [`RunConfig`]: flat, keys spelled like the flags.
#[derive(Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
struct RunFile {
    objective: Option<ObjectiveKind>,
    operators: Option<PathBuf>,
    lambda: Option<f64>,
    dim: Option<usize>,
    scale: Option<f64>,
    seed: Option<u64>,
    trace: Option<PathBuf>,
    summary: Option<PathBuf>,
    alpha_bar: Option<f64>,
    shrink: Option<f64>,
    tau: Option<f64>,
    max_iter: Option<usize>,
    max_backtracks: Option<usize>,
    tol: Option<f64>,
}

impl From<RunFile> for RunConfig {
    fn from(f: RunFile) -> Self {
        RunConfig {
            objective: f.objective,
            operators: f.operators,
            lambda: f.lambda,
            dim: f.dim,
            scale: f.scale,
            seed: f.seed,
            trace: f.trace,
            summary: f.summary,
            solver: SolverFlags {
                alpha_bar: f.alpha_bar,
                shrink: f.shrink,
                tau: f.tau,
                max_iter: f.max_iter,
                max_backtracks: f.max_backtracks,
                tol: f.tol,
            },
        }
    }
}

impl RunConfig {
    pub fn from_file(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path).map_err(at_path(path))?;
        Self::from_json(&text).map_err(|e| usage(format!("config {}: {e}", path.display())))
    }

    pub fn from_json(text: &str) -> CliResult<Self> {
        let file: RunFile = serde_json::from_str(text)?;
        Ok(file.into())
    }

    /// Fields set here win over `base`.
    pub fn or(self, base: RunConfig) -> RunConfig {
        RunConfig {
            objective: self.objective.or(base.objective),
            operators: self.operators.or(base.operators),
            lambda: self.lambda.or(base.lambda),
            dim: self.dim.or(base.dim),
            scale: self.scale.or(base.scale),
            seed: self.seed.or(base.seed),
            trace: self.trace.or(base.trace),
            summary: self.summary.or(base.summary),
            solver: self.solver.or(base.solver),
        }
    }
}
