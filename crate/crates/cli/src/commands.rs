use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use expgrad::diagnostics::suite::{all_pass, run_suite, CheckRecord, Suite};
use expgrad::par::with_threads;
use expgrad::random::{random_density, random_psd, seeded};
use expgrad::solver::write_trace_csv;
use expgrad::sweep::{lambda_sweep, sweep_csv};
use expgrad::{
    solve, solve_simplex, BurgObjective, DensityState, Execution, HedgedQstObjective, IterationRecord,
    MeasurementEnsemble, PoissonLinearObjective, ProbabilityVector, QstObjective, QuadraticObjective, SolveStatus,
    SolverConfig, VectorRows,
};
use serde::Serialize;

use crate::config::{ObjectiveKind, RunConfig, SolverFlags};
use crate::error::{at_path, usage, CliResult};

pub fn load_ensemble(path: &Path) -> CliResult<MeasurementEnsemble> {
    Ok(MeasurementEnsemble::from_json(&fs::read_to_string(path).map_err(at_path(path))?)?)
}

/// Writes to `path`, or standard output when absent.
fn emit(path: Option<&Path>, text: &str) -> CliResult<()> {
    match path {
        Some(p) => fs::write(p, text).map_err(at_path(p))?,
        None => io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn execution(jobs: usize) -> Execution {
    if jobs > 1 {
        Execution::Parallel
    } else {
        Execution::Sequential
    }
}

pub fn gen(dim: usize, num_ops: usize, seed: u64, out: &Path) -> CliResult<()> {
    if dim < 2 {
        return Err(usage(format!("--dim must be at least 2, got {dim}")));
    }
    if num_ops < 1 {
        return Err(usage("--num-ops must be at least 1"));
    }
    let mut rng = seeded(seed);
    let ops = (0..num_ops).map(|_| random_psd(&mut rng, dim)).collect();
    let ens = MeasurementEnsemble::new(ops)?;
    let mut text = ens.to_json()?;
    text.push('\n');
    fs::write(out, text).map_err(at_path(out))?;
    Ok(())
}

#[derive(Debug, Serialize)]
pub struct RunSummary {
    pub status: SolveStatus,
    pub iters: usize,
    pub final_f: f64,
    pub final_min_eig: f64,
    pub wall_time_ms: f64,
}

struct Outcome {
    status: SolveStatus,
    trace: Vec<IterationRecord>,
    final_f: f64,
    final_min_eig: f64,
}

fn required<T>(value: Option<T>, flag: &str, objective: &str) -> CliResult<T> {
    value.ok_or_else(|| usage(format!("--{flag} is required for objective {objective}")))
}

fn resolve_dim(cfg: &RunConfig, ens: Option<&MeasurementEnsemble>) -> CliResult<usize> {
    let dim = cfg
        .dim
        .or(ens.map(|e| e.dim()))
        .ok_or_else(|| usage("--dim or --operators is required"))?;
    if dim < 2 {
        return Err(usage(format!("--dim must be at least 2, got {dim}")));
    }
    Ok(dim)
}

fn solve_density(f: &dyn expgrad::Objective, solver: &SolverConfig) -> CliResult<Outcome> {
    let res = solve(&DensityState::maximally_mixed(f.dim()), f, solver)?;
    Ok(Outcome {
        status: res.status,
        final_min_eig: res.final_state.min_eigenvalue(),
        final_f: res.final_value,
        trace: res.trace,
    })
}

fn solve_vector(f: &dyn expgrad::VectorObjective, solver: &SolverConfig) -> CliResult<Outcome> {
    let res = solve_simplex(&ProbabilityVector::uniform(f.dim()), f, solver)?;
    Ok(Outcome {
        status: res.status,
        final_min_eig: res.final_state.min_entry(),
        final_f: res.final_value,
        trace: res.trace,
    })
}

pub fn run(flags: RunConfig, config_file: Option<&Path>) -> CliResult<RunSummary> {
    let cfg = match config_file {
        Some(path) => flags.or(RunConfig::from_file(path)?),
        None => flags,
    };
    let objective = cfg.objective.ok_or_else(|| usage("--objective is required"))?;
    let solver = cfg.solver.to_config()?;
    let name = match objective {
        ObjectiveKind::Qst => "qst",
        ObjectiveKind::HedgedQst => "hedged-qst",
        ObjectiveKind::Burg => "burg",
        ObjectiveKind::Poisson => "poisson",
        ObjectiveKind::Quadratic => "quadratic",
    };
    let ensemble = match (&cfg.operators, objective) {
        (Some(p), _) => Some(load_ensemble(p)?),
        (None, ObjectiveKind::Qst | ObjectiveKind::HedgedQst | ObjectiveKind::Poisson) => {
            return Err(required(None::<()>, "operators", name).unwrap_err());
        }
        (None, _) => None,
    };

    let start = Instant::now();
    let outcome = match objective {
        ObjectiveKind::Qst => solve_density(&QstObjective::new(ensemble.expect("checked")), &solver)?,
        ObjectiveKind::HedgedQst => {
            let lambda = required(cfg.lambda, "lambda", name)?;
            if !(lambda > 0.0) {
                return Err(usage(format!("--lambda must be positive, got {lambda}")));
            }
            solve_density(&HedgedQstObjective::new(ensemble.expect("checked"), lambda)?, &solver)?
        }
        ObjectiveKind::Quadratic => {
            let dim = resolve_dim(&cfg, ensemble.as_ref())?;
            let scale = cfg.scale.unwrap_or(1.0);
            if !(scale > 0.0) {
                return Err(usage(format!("--scale must be positive, got {scale}")));
            }
            let center = random_density(&mut seeded(cfg.seed.unwrap_or(0)), dim);
            solve_density(&QuadraticObjective::new(scale, center.matrix().clone())?, &solver)?
        }
        ObjectiveKind::Burg => {
            let dim = resolve_dim(&cfg, ensemble.as_ref())?;
            solve_vector(&BurgObjective::new(dim)?, &solver)?
        }
        ObjectiveKind::Poisson => {
            let ens = ensemble.expect("checked");
            let rows = ens.operators().iter().map(|m| m.diagonal()).collect();
            solve_vector(&PoissonLinearObjective::new(VectorRows::new(rows)?)?, &solver)?
        }
    };
    let wall_time_ms = start.elapsed().as_secs_f64() * 1e3;

    if let Some(path) = &cfg.trace {
        let mut out = BufWriter::new(File::create(path).map_err(at_path(path))?);
        write_trace_csv(&outcome.trace, &mut out)?;
        out.flush()?;
    }
    let summary = RunSummary {
        status: outcome.status,
        iters: outcome.trace.len(),
        final_f: outcome.final_f,
        final_min_eig: outcome.final_min_eig,
        wall_time_ms,
    };
    let mut text = serde_json::to_string_pretty(&summary)?;
    text.push('\n');
    emit(cfg.summary.as_deref(), &text)?;
    Ok(summary)
}

#[derive(Debug, Serialize)]
pub struct DiagnoseReport {
    pub suite: String,
    pub samples: usize,
    pub seed: u64,
    pub all_pass: bool,
    pub failures: usize,
    pub records: Vec<CheckRecord>,
}

/// Returns whether every check passed.
pub fn diagnose(suite: &str, samples: usize, seed: u64, jobs: usize, report: Option<&Path>) -> CliResult<bool> {
    let parsed: Suite = suite.parse().map_err(|e: expgrad::Error| usage(e.to_string()))?;
    if samples < 1 {
        return Err(usage("--samples must be at least 1"));
    }
    let records = with_threads(jobs, || run_suite(parsed, samples, seed, execution(jobs)))?;
    let report_data = DiagnoseReport {
        suite: parsed.to_string(),
        samples,
        seed,
        all_pass: all_pass(&records),
        failures: records.iter().filter(|r| !r.pass).count(),
        records,
    };
    let mut text = serde_json::to_string_pretty(&report_data)?;
    text.push('\n');
    emit(report, &text)?;
    Ok(report_data.all_pass)
}

pub fn sweep(
    operators: &Path,
    lambdas: &[f64],
    solver: &SolverFlags,
    jobs: usize,
    out: Option<&PathBuf>,
) -> CliResult<()> {
    expgrad::sweep::validate_lambdas(lambdas).map_err(|e| usage(e.to_string()))?;
    let cfg = solver.to_config()?;
    let ens = load_ensemble(operators)?;
    let rows = with_threads(jobs, || lambda_sweep(&ens, lambdas, &cfg, execution(jobs)))?;
    emit(out.map(|p| p.as_path()), &sweep_csv(&rows))
}
