//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion's outcome differs from the expectation recorded
//! in `EXPECTED_FAILURES`.

use std::f64::consts::LN_2;
use std::process::ExitCode;
use std::time::Instant;

use expgrad::diagnostics::suite::{fd_margin, random_probe, run_suite, CheckRecord, DerivativeSource, Suite};
use expgrad::diagnostics::{fixed_point_check, geometric_grid, kappa, LogPartitionProbe, KAPPA_RTOL};
use expgrad::random::{random_density, random_ensemble, random_probability, random_rows, seeded, substream};
use expgrad::sweep::lambda_sweep;
use expgrad::{
    eg_step, qst_hardness_witness, quantum_relative_entropy, solve_observed, solve_simplex_observed, BurgObjective,
    DensityState, Execution, HedgedQstObjective, HermitianOperator, IterationRecord, MeasurementEnsemble, Objective,
    PoissonLinearObjective, ProbabilityVector, QstObjective, QuadraticObjective, SchattenP, SolveStatus, SolverConfig,
    VectorObjective, VectorRows,
};

// Pinned tolerances.
const MONOTONE_RTOL: f64 = 1e-10;
const MAX_BACKTRACKS: usize = 60;
const MAX_ITERS: usize = 10_000;
const HEDGED_GAP_TOL: f64 = 1e-8;
const APP_A_F_TOL: f64 = 1e-6;
const APP_A_STATE_TOL: f64 = 1e-4;
const BURG_L1_TOL: f64 = 1e-6;
const BURG_STOP_TOL: f64 = 1e-14;
const PROBES: usize = 100;
const PROBE_SEED: u64 = 7;
const ORACLE_SLACK: f64 = 1e-6;
const ORACLE_GRID: usize = 200;
const ORACLE_RANDOM: usize = 50;
const SWEEP_MONOTONE_TOL: f64 = 1e-6;
const SWEEP_FINAL_GAP: f64 = 1e-3;
const CONSISTENCY_TOL: f64 = 1e-10;
const HEDGE_LAMBDA: f64 = 0.05;

/// Criteria whose failure is understood and recorded; the suite checks that
/// they still fail so a fix is noticed.
const EXPECTED_FAILURES: &[usize] = &[9];

struct Outcome {
    id: usize,
    name: &'static str,
    pass: bool,
    detail: String,
}

fn outcome(id: usize, name: &'static str, pass: bool, detail: String) -> Outcome {
    Outcome { id, name, pass, detail }
}

/// One solver run recorded for criteria 1 to 3.
struct Run {
    label: String,
    f0: f64,
    trace: Vec<IterationRecord>,
    status: SolveStatus,
}

fn density_run(label: String, f: &dyn Objective, rho0: &DensityState, cfg: &SolverConfig) -> Run {
    let res = solve_observed(rho0, f, cfg, &mut |_, _| {}).expect("density solve");
    Run { label, f0: f.value(rho0), trace: res.trace, status: res.status }
}

fn simplex_run(label: String, f: &dyn VectorObjective, x0: &ProbabilityVector, cfg: &SolverConfig) -> Run {
    let res = solve_simplex_observed(x0, f, cfg, &mut |_, _| {}).expect("simplex solve");
    Run { label, f0: f.value(x0), trace: res.trace, status: res.status }
}

fn base_config() -> SolverConfig {
    SolverConfig { max_iters: MAX_ITERS, max_backtracks: MAX_BACKTRACKS, ..Default::default() }
}

/// Twenty seeded instances, four per objective family.
fn instance_runs() -> Vec<Run> {
    let cfg = base_config();
    let mut runs = Vec::new();
    for i in 0..4u64 {
        let dim = 2 + i as usize;
        let mut rng = substream(1000, i);
        let ens = random_ensemble(&mut rng, dim, dim + 3);
        let mixed = DensityState::maximally_mixed(dim);
        runs.push(density_run(format!("qst/{i}"), &QstObjective::new(ens.clone()), &mixed, &cfg));
        let hedged = HedgedQstObjective::new(ens, HEDGE_LAMBDA).unwrap();
        runs.push(density_run(format!("hedged-qst/{i}"), &hedged, &mixed, &cfg));

        let x0 = ProbabilityVector::new(random_probability(&mut rng, dim + 1)).unwrap();
        runs.push(simplex_run(format!("burg/{i}"), &BurgObjective::new(dim + 1).unwrap(), &x0, &cfg));

        let rows = VectorRows::new(random_rows(&mut rng, dim + 1, dim + 4)).unwrap();
        let poisson = PoissonLinearObjective::new(rows).unwrap();
        runs.push(simplex_run(format!("poisson/{i}"), &poisson, &ProbabilityVector::uniform(dim + 1), &cfg));

        let center = random_density(&mut rng, dim);
        let quad = QuadraticObjective::new(0.5 * 2f64.powi(i as i32), center.matrix().clone()).unwrap();
        let rho0 = random_density(&mut rng, dim);
        runs.push(density_run(format!("quadratic/{i}"), &quad, &rho0, &cfg));
    }
    runs
}

fn criterion_1(runs: &[Run]) -> Outcome {
    let mut worst = f64::NEG_INFINITY;
    let mut worst_label = String::new();
    for run in runs {
        let mut prev = run.f0;
        for r in &run.trace {
            let excess = (r.f_value - prev) / prev.abs().max(1.0);
            if excess > worst {
                worst = excess;
                worst_label = format!("{} k={}", run.label, r.k);
            }
            prev = r.f_value;
        }
    }
    let steps: usize = runs.iter().map(|r| r.trace.len()).sum();
    outcome(
        1,
        "monotone descent",
        worst <= MONOTONE_RTOL,
        format!("{} runs, {steps} steps, worst relative increase {worst:.3e} at {worst_label} (tol {MONOTONE_RTOL:e})", runs.len()),
    )
}

fn criterion_2(runs: &[Run]) -> Outcome {
    let most = runs.iter().flat_map(|r| r.trace.iter().map(|t| t.backtracks)).max().unwrap_or(0);
    let capped = runs.iter().filter(|r| r.status == SolveStatus::BacktrackCapHit).count();
    outcome(
        2,
        "armijo termination",
        most < MAX_BACKTRACKS && capped == 0,
        format!("max backtracks {most} (cap {MAX_BACKTRACKS}), {capped} runs hit the cap"),
    )
}

fn criterion_3(runs: &[Run]) -> Outcome {
    let hedged: Vec<&Run> = runs.iter().filter(|r| r.label.starts_with("hedged-qst")).collect();
    let mins: Vec<f64> = hedged
        .iter()
        .map(|r| r.trace.iter().map(|t| t.bregman_gap_bar).fold(f64::INFINITY, f64::min))
        .collect();
    let worst = mins.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let iters = hedged.iter().map(|r| r.trace.len()).max().unwrap_or(0);
    outcome(
        3,
        "stationarity gap (hedged)",
        !hedged.is_empty() && worst <= HEDGED_GAP_TOL && iters <= MAX_ITERS,
        format!("{} runs, largest min-gap {worst:.3e} (tol {HEDGED_GAP_TOL:e}), at most {iters} iterations", hedged.len()),
    )
}

fn criterion_4() -> Outcome {
    let f = QstObjective::new(MeasurementEnsemble::coordinate_pair());
    let rho0 = DensityState::from_diagonal(&[0.9, 0.1]).unwrap();
    let half = HermitianOperator::scaled_identity(2, 0.5);
    let target = 2.0 * LN_2;
    let mut pair_hit = None;
    let mut best = (f64::INFINITY, f64::INFINITY);
    solve_observed(&rho0, &f, &base_config(), &mut |r, rho| {
        let df = (r.f_value - target).abs();
        let dist = (rho.matrix() - &half).schatten_norm(SchattenP::One).unwrap();
        best = (best.0.min(df), best.1.min(dist));
        if pair_hit.is_none() && df <= APP_A_F_TOL && dist <= APP_A_STATE_TOL {
            pair_hit = Some(r.k);
        }
    })
    .unwrap();

    let burg = BurgObjective::new(3).unwrap();
    let x0 = ProbabilityVector::new(vec![0.7, 0.2, 0.1]).unwrap();
    let uniform = ProbabilityVector::uniform(3);
    let cfg = SolverConfig { stop_tol: BURG_STOP_TOL, ..base_config() };
    let mut burg_best = f64::INFINITY;
    solve_simplex_observed(&x0, &burg, &cfg, &mut |_, x| burg_best = burg_best.min(x.l1_distance(&uniform))).unwrap();

    outcome(
        4,
        "known-optimum recovery",
        pair_hit.is_some() && burg_best <= BURG_L1_TOL,
        format!(
            "coordinate pair: hit at k={pair_hit:?}, best |f-2log2| {:.2e}, best ||rho-I/2||_1 {:.2e}; Burg best l1 {burg_best:.2e} (tol {BURG_L1_TOL:e}, stop tol {BURG_STOP_TOL:e})",
            best.0, best.1
        ),
    )
}

fn worst(records: &[CheckRecord], check: &str) -> (f64, usize, usize) {
    let selected: Vec<&CheckRecord> = records.iter().filter(|r| r.check == check).collect();
    let margin = selected.iter().map(|r| r.worst_margin).fold(f64::INFINITY, f64::min);
    let fails = selected.iter().filter(|r| !r.pass).count();
    (margin, fails, selected.len())
}

fn describe(records: &[CheckRecord], checks: &[&str]) -> (bool, String) {
    let mut pass = true;
    let mut parts = Vec::new();
    for c in checks {
        let (m, fails, n) = worst(records, c);
        pass &= fails == 0 && n == PROBES;
        parts.push(format!("{c}: {}/{n} fail, min margin {m:.3e}", fails));
    }
    (pass, parts.join("; "))
}

fn criterion_5(records: &[CheckRecord]) -> Outcome {
    let (pass, detail) = describe(records, &["bregman-identity"]);
    outcome(5, "Bregman-gap identity", pass, detail)
}

fn criterion_6(records: &[CheckRecord]) -> Outcome {
    let (pass, detail) = describe(records, &["self-concordance", "sandwich", "peierls-bogoliubov"]);
    outcome(6, "self-concordance and sandwich", pass, detail)
}

fn criterion_7(records: &[CheckRecord]) -> Outcome {
    let (pass, detail) = describe(records, &["ratio-monotonicity"]);
    outcome(7, "ratio monotonicity", pass, detail)
}

fn criterion_8(records: &[CheckRecord]) -> Outcome {
    let (pass, detail) = describe(records, &["kappa", "variance-bound"]);
    let point = kappa(1.0, 1.0);
    outcome(
        8,
        "kappa and variance bounds",
        pass && point == 0.5,
        format!("{detail}; kappa(1, 1) = {point:?} (slack {KAPPA_RTOL:e})"),
    )
}

/// The eta-moment formulas for `phi''` and `phi'''` are checked against
/// finite differences; the exact derivatives are reported alongside.
fn criterion_9() -> Outcome {
    let alphas = expgrad::diagnostics::suite::MOMENT_ALPHAS;
    let (mut moment_fail, mut exact_fail) = (0, 0);
    let (mut moment_worst, mut exact_worst) = (f64::INFINITY, f64::INFINITY);
    for i in 0..PROBES {
        let (probe, _, _) = random_probe(PROBE_SEED, i).unwrap();
        let m = alphas.iter().map(|&a| fd_margin(&probe, a, DerivativeSource::Moments).unwrap()).fold(f64::INFINITY, f64::min);
        let e = alphas.iter().map(|&a| fd_margin(&probe, a, DerivativeSource::Exact).unwrap()).fold(f64::INFINITY, f64::min);
        moment_fail += usize::from(m < 0.0);
        exact_fail += usize::from(e < 0.0);
        moment_worst = moment_worst.min(m);
        exact_worst = exact_worst.min(e);
    }
    // commuting pairs: the two formulas coincide
    let mut commuting_dev = 0.0_f64;
    for i in 0..20u64 {
        let mut rng = seeded(500 + i);
        let dim = 2 + (i as usize % 4);
        let rho = DensityState::from_diagonal(&random_probability(&mut rng, dim)).unwrap();
        let g: Vec<f64> = random_probability(&mut rng, dim).iter().map(|v| 8.0 * v).collect();
        let probe = LogPartitionProbe::new(rho, HermitianOperator::from_real_diagonal(&g)).unwrap();
        for &a in &alphas {
            let (m, e) = (probe.moments(a).unwrap(), probe.derivatives(a).unwrap());
            let scale = probe.delta().powi(3).max(1.0);
            let dev = [(m.first - e.first), (m.second - e.second), (m.third - e.third)]
                .iter()
                .fold(0.0_f64, |acc, d| acc.max(d.abs() / scale));
            commuting_dev = commuting_dev.max(dev);
        }
    }
    outcome(
        9,
        "derivative formulas vs finite differences",
        moment_fail == 0,
        format!(
            "eta-moment formulas: {moment_fail}/{PROBES} random probes fail (min margin {moment_worst:.3e}), \
             commuting probes match exact derivatives to {commuting_dev:.1e}; exact derivatives: {exact_fail}/{PROBES} fail (min margin {exact_worst:.3e})"
        ),
    )
}

fn criterion_10(records: &[CheckRecord]) -> Outcome {
    let (pass, detail) = describe(records, &["fixed-point", "inner-product"]);
    let mut rng = seeded(10);
    let f = QstObjective::new(MeasurementEnsemble::coordinate_pair());
    let grid = [0.1, 1.0, 10.0];
    let at_opt = fixed_point_check(&DensityState::maximally_mixed(2), &f, &grid, &mut rng, 100).unwrap();
    let off = fixed_point_check(&DensityState::from_diagonal(&[0.9, 0.1]).unwrap(), &f, &grid, &mut rng, 0).unwrap();
    let ok = at_opt.is_fixed && at_opt.optimality_holds() && !off.is_fixed;
    outcome(
        10,
        "fixed points and inner-product bound",
        pass && ok,
        format!("{detail}; coordinate pair at I/2 fixed={}, at diag(0.9,0.1) fixed={}", at_opt.is_fixed, off.is_fixed),
    )
}

/// `alpha <g, sigma - rho> + D(sigma, rho)`.
fn subproblem(rho: &DensityState, g: &HermitianOperator, alpha: f64, sigma: &DensityState) -> f64 {
    alpha * g.inner(&(sigma.matrix() - rho.matrix())).unwrap() + quantum_relative_entropy(sigma, rho).unwrap()
}

fn criterion_11() -> Outcome {
    let mut worst = f64::NEG_INFINITY;
    let mut cases = 0;
    for i in 0..10u64 {
        let mut rng = substream(1100, i);
        let rho = random_density(&mut rng, 2);
        let f = QstObjective::new(random_ensemble(&mut rng, 2, 4));
        let g = f.gradient(&rho).unwrap();
        let mut candidates: Vec<DensityState> = (0..ORACLE_GRID)
            .map(|j| {
                let t = (j as f64 + 0.5) / ORACLE_GRID as f64;
                DensityState::from_diagonal(&[t, 1.0 - t]).unwrap()
            })
            .collect();
        candidates.extend((0..ORACLE_RANDOM).map(|_| random_density(&mut rng, 2)));
        for alpha in [0.1, 1.0, 5.0] {
            let step = eg_step(&rho, &g, alpha).unwrap();
            let at_step = subproblem(&rho, &g, alpha, &step);
            let oracle = candidates.iter().map(|s| subproblem(&rho, &g, alpha, s)).fold(f64::INFINITY, f64::min);
            worst = worst.max(at_step - oracle);
            cases += 1;
        }
    }
    outcome(
        11,
        "mirror-descent equivalence",
        worst <= ORACLE_SLACK,
        format!(
            "{cases} (instance, step) pairs, {} candidates each, worst excess over oracle {worst:.3e} (slack {ORACLE_SLACK:e})",
            ORACLE_GRID + ORACLE_RANDOM
        ),
    )
}

fn criterion_12() -> Outcome {
    let rows = lambda_sweep(&MeasurementEnsemble::coordinate_pair(), &[0.1, 0.01, 0.001], &base_config(), Execution::Parallel)
        .unwrap();
    let values: Vec<f64> = rows.iter().map(|r| r.unhedged_value).collect();
    let monotone = values.windows(2).all(|w| w[1] <= w[0] + SWEEP_MONOTONE_TOL);
    let gap = (values[values.len() - 1] - 2.0 * LN_2).abs();
    outcome(
        12,
        "barrier sweep limit",
        monotone && gap <= SWEEP_FINAL_GAP,
        format!("unhedged f {values:?}, monotone={monotone}, final gap {gap:.3e} (tol {SWEEP_FINAL_GAP:e})"),
    )
}

fn criterion_13() -> Outcome {
    let grid = geometric_grid(1e-2, 1e3, 51);
    let violations: Vec<f64> = grid.iter().map(|&l| qst_hardness_witness(l).unwrap().1).collect();
    let largest = violations.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    outcome(
        13,
        "hardness witness",
        largest < 0.0,
        format!("{} values of L in [1e-2, 1e3], largest violation {largest:.3e}", grid.len()),
    )
}

fn criterion_14() -> Outcome {
    let cfg = SolverConfig { max_iters: 500, ..base_config() };
    let mut worst = 0.0_f64;
    let mut steps = 0;
    let mut structure_ok = true;
    for i in 0..10u64 {
        let mut rng = substream(1400, i);
        let dim = 2 + (i as usize % 5);
        let rows = VectorRows::new(random_rows(&mut rng, dim, dim + 3)).unwrap();
        let f = PoissonLinearObjective::new(rows).unwrap();
        let mut vec_states = Vec::new();
        let vec_res = solve_simplex_observed(&ProbabilityVector::uniform(dim), &f, &cfg, &mut |_, x| {
            vec_states.push(x.as_slice().to_vec())
        })
        .unwrap();
        let mut mat_states = Vec::new();
        let mat_res = solve_observed(&DensityState::maximally_mixed(dim), &f.as_qst(), &cfg, &mut |_, rho| {
            mat_states.push(rho.matrix().clone())
        })
        .unwrap();
        structure_ok &= vec_res.trace.len() == mat_res.trace.len() && vec_res.status == mat_res.status;
        for ((a, b), (x, rho)) in vec_res.trace.iter().zip(&mat_res.trace).zip(vec_states.iter().zip(&mat_states)) {
            structure_ok &= a.backtracks == b.backtracks;
            worst = worst.max((a.f_value - b.f_value).abs());
            worst = worst.max((a.alpha_k - b.alpha_k).abs());
            let diag = HermitianOperator::from_real_diagonal(x);
            worst = worst.max((rho - &diag).schatten_norm(SchattenP::Infinity).unwrap());
            steps += 1;
        }
    }
    outcome(
        14,
        "simplex/spectrahedron consistency",
        structure_ok && worst <= CONSISTENCY_TOL,
        format!("10 instances, {steps} iterates, worst deviation {worst:.3e} (tol {CONSISTENCY_TOL:e}), same traces={structure_ok}"),
    )
}

fn main() -> ExitCode {
    let start = Instant::now();
    let runs = instance_runs();
    let records = run_suite(Suite::All, PROBES, PROBE_SEED, Execution::Parallel).expect("diagnostics suite");
    let outcomes = vec![
        criterion_1(&runs),
        criterion_2(&runs),
        criterion_3(&runs),
        criterion_4(),
        criterion_5(&records),
        criterion_6(&records),
        criterion_7(&records),
        criterion_8(&records),
        criterion_9(),
        criterion_10(&records),
        criterion_11(),
        criterion_12(),
        criterion_13(),
        criterion_14(),
    ];
    let mut unexpected = 0;
    for o in &outcomes {
        let verdict = if o.pass { "PASS" } else { "FAIL" };
        let expected_fail = EXPECTED_FAILURES.contains(&o.id);
        let note = if expected_fail && !o.pass { " [known failure]" } else { "" };
        println!("criterion {:>2} {verdict} {}: {}{note}", o.id, o.name, o.detail);
        if o.pass == expected_fail {
            unexpected += 1;
        }
    }
    let passed = outcomes.iter().filter(|o| o.pass).count();
    println!("{passed}/{} criteria pass in {:.1}s", outcomes.len(), start.elapsed().as_secs_f64());
    if unexpected > 0 {
        println!("{unexpected} criteria differ from the recorded expectation");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
