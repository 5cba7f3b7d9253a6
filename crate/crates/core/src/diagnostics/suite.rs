//! Seeded batches of random probes run through every certificate.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use super::finite_diff;
use super::*;
use crate::objectives::{MeasurementEnsemble, QstObjective, QuadraticObjective};
use crate::par::{map_indices, Execution};
use crate::random::{random_ensemble, random_hermitian, random_unitary, substream, SeededRng};

/// Dimensions cycled through by probe index.
pub const PROBE_DIMS: [usize; 4] = [2, 3, 5, 8];

/// Step sizes for the gap identity and sandwich checks.
pub const GAP_STEPS: [f64; 3] = [0.1, 1.0, 5.0];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Suite {
    Sandwich,
    Ratio,
    Moments,
    Kappa,
    FixedPoint,
    SelfConcordance,
    All,
}

impl Suite {
    pub const NAMES: [&'static str; 7] =
        ["sandwich", "ratio", "moments", "kappa", "fixed-point", "self-concordance", "all"];

    fn includes(self, other: Suite) -> bool {
        self == Suite::All || self == other
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Suite::Sandwich => "sandwich",
            Suite::Ratio => "ratio",
            Suite::Moments => "moments",
            Suite::Kappa => "kappa",
            Suite::FixedPoint => "fixed-point",
            Suite::SelfConcordance => "self-concordance",
            Suite::All => "all",
        };
        f.write_str(name)
    }
}

impl FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "sandwich" => Suite::Sandwich,
            "ratio" => Suite::Ratio,
            "moments" => Suite::Moments,
            "kappa" => Suite::Kappa,
            "fixed-point" => Suite::FixedPoint,
            "self-concordance" => Suite::SelfConcordance,
            "all" => Suite::All,
            other => return Err(Error::InvalidInput(format!("unknown suite {other:?}"))),
        })
    }
}

/// One line of the diagnostics report. `worst_margin` is the smallest slack
/// of the check's contract: non-negative exactly when `pass` is true.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckRecord {
    pub check: String,
    pub seed: u64,
    pub sample: usize,
    pub dim: usize,
    pub pass: bool,
    pub worst_margin: f64,
}

/// Which population a probe is drawn from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProbeKind {
    /// `grad f` a random Hermitian matrix (Frobenius norm in `[0.5, 4]`).
    RandomHermitian,
    /// `grad f` the QST gradient of a random ensemble at `rho`.
    QstGradient,
}

/// Probe number `index` of the batch seeded with `seed`: `rho = exp(S)/tr exp(S)`
/// with `S` of unit Frobenius norm; even indices take a random Hermitian
/// gradient, odd indices a QST gradient.
pub fn random_probe(seed: u64, index: usize) -> Result<(LogPartitionProbe, ProbeKind, SeededRng)> {
    let mut rng = substream(seed, index as u64);
    let dim = PROBE_DIMS[index % PROBE_DIMS.len()];
    let rho = random_density(&mut rng, dim);
    let (grad, kind) = if index.is_multiple_of(2) {
        let norm = 0.5 + 3.5 * rng.random::<f64>();
        (random_hermitian(&mut rng, dim, norm), ProbeKind::RandomHermitian)
    } else {
        let ens = random_ensemble(&mut rng, dim, dim + 2);
        (QstObjective::new(ens).gradient(&rho)?, ProbeKind::QstGradient)
    };
    Ok((LogPartitionProbe::new(rho, grad)?, kind, rng))
}

fn record(check: &str, seed: u64, sample: usize, dim: usize, worst_margin: f64) -> CheckRecord {
    CheckRecord { check: check.to_string(), seed, sample, dim, pass: worst_margin >= 0.0, worst_margin }
}

fn relative_error(estimate: f64, exact: f64) -> f64 {
    (estimate - exact).abs() / exact.abs().max(f64::MIN_POSITIVE)
}

/// Which formula for `(phi', phi'', phi''')` a finite-difference check targets.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DerivativeSource {
    /// [`LogPartitionProbe::derivatives`].
    Exact,
    /// [`LogPartitionProbe::moments`], the moments of `eta_alpha`.
    Moments,
}

/// Smallest slack of `|fd - value| <= FD_RTOL * |value|` over the three
/// derivatives, each taking the best of the finite-difference steps.
pub fn fd_margin(probe: &LogPartitionProbe, alpha: f64, source: DerivativeSource) -> Result<f64> {
    let exact = match source {
        DerivativeSource::Exact => probe.derivatives(alpha)?,
        DerivativeSource::Moments => probe.moments(alpha)?,
    };
    let phi = |a: f64| probe.phi(a).unwrap_or(f64::NAN);
    let est = finite_diff::estimates(phi, alpha);
    let best = |pick: fn(&finite_diff::DerivativeEstimate) -> f64, want: f64| {
        est.iter().map(|e| relative_error(pick(e), want)).fold(f64::INFINITY, f64::min)
    };
    let errs = [
        best(|e| e.first, exact.first),
        best(|e| e.second, exact.second),
        best(|e| e.third, exact.third),
    ];
    Ok(errs.iter().map(|e| FD_RTOL - e).fold(f64::INFINITY, f64::min))
}

/// Evaluation points for the moment checks.
pub const MOMENT_ALPHAS: [f64; 3] = [0.0, 0.3, 1.0];

fn run_probe(suite: Suite, seed: u64, index: usize) -> Result<Vec<CheckRecord>> {
    let (probe, _kind, mut rng) = random_probe(seed, index)?;
    let dim = probe.dim();
    let mut out = Vec::new();
    let ratio_grid = geometric_grid(1e-3, 10.0, 25);

    if suite.includes(Suite::Sandwich) {
        let mut identity = f64::INFINITY;
        let mut sandwich = f64::INFINITY;
        let mut peierls = f64::INFINITY;
        for &a in &GAP_STEPS {
            let moment = probe.bregman_gap(a)?;
            let direct = probe.bregman_gap_direct(a)?;
            identity = identity.min(BREGMAN_IDENTITY_RTOL - relative_error(moment, direct));
            let s = sandwich_check(&probe, a)?;
            sandwich = sandwich.min(s.margin());
            peierls = peierls.min(moment + LOWER_BOUND_ATOL);
        }
        out.push(record("bregman-identity", seed, index, dim, identity));
        out.push(record("sandwich", seed, index, dim, sandwich));
        out.push(record("peierls-bogoliubov", seed, index, dim, peierls));
    }
    if suite.includes(Suite::Ratio) {
        let r = ratio_monotonicity_check(&probe, &ratio_grid)?;
        out.push(record("ratio-monotonicity", seed, index, dim, -r.worst_violation));
    }
    if suite.includes(Suite::Moments) {
        let (mut exact, mut moments) = (f64::INFINITY, f64::INFINITY);
        for &a in &MOMENT_ALPHAS {
            exact = exact.min(fd_margin(&probe, a, DerivativeSource::Exact)?);
            moments = moments.min(fd_margin(&probe, a, DerivativeSource::Moments)?);
        }
        out.push(record("derivatives-fd", seed, index, dim, exact));
        out.push(record("moments-fd", seed, index, dim, moments));
        out.push(record("variance-bound", seed, index, dim, variance_bound_margin(&probe, &ratio_grid)?));
    }
    if suite.includes(Suite::Kappa) {
        let alpha_bar = 1.0;
        let grid = geometric_grid(1e-3, alpha_bar, 20);
        let k = kappa_bound_check(&probe, alpha_bar, &grid)?;
        out.push(record("kappa", seed, index, dim, k.worst_margin + KAPPA_RTOL));
    }
    if suite.includes(Suite::SelfConcordance) {
        let s = self_concordance_check(&probe, &ratio_grid)?;
        out.push(record("self-concordance", seed, index, dim, s.worst_margin));
    }
    if suite.includes(Suite::FixedPoint) {
        out.push(record("fixed-point", seed, index, dim, fixed_point_margin(dim, &mut rng)?));
        let ens = random_ensemble(&mut rng, dim, dim + 2);
        let f = QstObjective::new(ens);
        let rho = random_density(&mut rng, dim);
        let mut worst = f64::INFINITY;
        for a in [0.1, 1.0] {
            worst = worst.min(inner_product_check(&rho, &f, a)? + INNER_PRODUCT_ATOL);
        }
        out.push(record("inner-product", seed, index, dim, worst));
    }
    Ok(out)
}

/// Constructed optima must be reported fixed and optimal; a random state of
/// a generic instance must be reported not fixed. The margin is the smallest
/// slack among those conditions.
fn fixed_point_margin(dim: usize, rng: &mut SeededRng) -> Result<f64> {
    let grid = [0.1, 1.0, 10.0];
    let mut margin = f64::INFINITY;

    // rotated coordinate ensemble: optimum at I/d
    let u = random_unitary(rng, dim);
    let ops = (0..dim)
        .map(|i| {
            let col: Vec<_> = u.column(i).iter().copied().collect();
            HermitianOperator::outer(&col, 1.0)
        })
        .collect();
    let qst = QstObjective::new(MeasurementEnsemble::new(ops)?);
    let mixed = DensityState::maximally_mixed(dim);
    let rep = fixed_point_check(&mixed, &qst, &grid, rng, 100)?;
    margin = margin.min(FIXED_POINT_MOVEMENT - rep.max_movement);
    margin = margin.min(rep.optimality_margin.unwrap_or(f64::NEG_INFINITY) + OPTIMALITY_ATOL);

    // quadratic at its own (feasible) center
    let center = random_density(rng, dim);
    let quad = QuadraticObjective::new(1.0, center.matrix().clone())?;
    let rep = fixed_point_check(&center, &quad, &grid, rng, 100)?;
    margin = margin.min(FIXED_POINT_MOVEMENT - rep.max_movement);
    margin = margin.min(rep.optimality_margin.unwrap_or(f64::NEG_INFINITY) + OPTIMALITY_ATOL);

    // perturbed: a random state is not a minimizer of a generic instance
    let f = QstObjective::new(random_ensemble(rng, dim, dim + 2));
    let rho = random_density(rng, dim);
    let rep = fixed_point_check(&rho, &f, &grid, rng, 0)?;
    margin = margin.min(if rep.is_fixed { -1.0 } else { rep.max_movement - FIXED_POINT_MOVEMENT });
    Ok(margin)
}

/// Runs `suite` on `samples` probes. Probe `i` draws from stream `i` of
/// `seed`, so the report does not depend on `exec`.
pub fn run_suite(suite: Suite, samples: usize, seed: u64, exec: Execution) -> Result<Vec<CheckRecord>> {
    if samples == 0 {
        return Err(Error::InvalidInput("samples must be at least 1".into()));
    }
    let batches = map_indices(samples, exec, |i| run_probe(suite, seed, i));
    let mut out = Vec::new();
    for b in batches {
        out.extend(b?);
    }
    Ok(out)
}

pub fn all_pass(records: &[CheckRecord]) -> bool {
    records.iter().all(|r| r.pass)
}
