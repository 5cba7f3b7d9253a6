//! Exponentiated gradient iterations with Armijo backtracking.
//!
//! The matrix path keeps every iterate as its normalized exponent `log rho`
//! and applies the update additively, `log rho - alpha grad`, followed by a
//! log-sum-exp shift. The simplex path is the same rule applied entrywise.
//! Both share one driver through the [`Geometry`] trait.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::density::{DensityState, DEFAULT_EIG_FLOOR};
use crate::entropy::{classical_relative_entropy, quantum_relative_entropy, ProbabilityVector};
use crate::error::{Error, Result};
use crate::hermitian::HermitianOperator;
use crate::objectives::{Objective, VectorObjective};

/// Armijo parameters, iteration caps and tolerances.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", default)]
pub struct SolverConfig {
    pub alpha_bar: f64,
    pub shrink: f64,
    pub tau: f64,
    pub max_iters: usize,
    pub max_backtracks: usize,
    pub stop_tol: f64,
    pub eig_floor: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            alpha_bar: 1.0,
            shrink: 0.5,
            tau: 0.5,
            max_iters: 10_000,
            max_backtracks: 60,
            stop_tol: 1e-10,
            eig_floor: DEFAULT_EIG_FLOOR,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidInput(what.to_string()));
        if !(self.alpha_bar > 0.0) || !self.alpha_bar.is_finite() {
            return bad("alpha_bar must be positive");
        }
        if !(self.shrink > 0.0 && self.shrink < 1.0) {
            return bad("shrink must lie in (0, 1)");
        }
        if !(self.tau > 0.0 && self.tau < 1.0) {
            return bad("tau must lie in (0, 1)");
        }
        if self.max_backtracks == 0 {
            return bad("max_backtracks must be positive");
        }
        if !(self.stop_tol > 0.0) {
            return bad("stop_tol must be positive");
        }
        if !(self.eig_floor > 0.0) {
            return bad("eig_floor must be positive");
        }
        Ok(())
    }

    /// Step size after `backtracks` reductions: `alpha_bar * shrink^j`.
    pub fn step_size(&self, backtracks: usize) -> f64 {
        self.alpha_bar * self.shrink.powi(backtracks as i32)
    }
}

/// One row of the solver trace.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IterationRecord {
    pub k: usize,
    pub f_value: f64,
    pub alpha_k: f64,
    pub backtracks: usize,
    /// Spectral width of the gradient at the previous iterate.
    pub delta_k: f64,
    /// `D(x_k(alpha_bar), x_k)`, the stationarity measure at the new iterate.
    pub bregman_gap_bar: f64,
    pub min_eig: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveStatus {
    Converged,
    MaxIters,
    BacktrackCapHit,
    Stationary,
}

impl SolveStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolveStatus::Converged => "Converged",
            SolveStatus::MaxIters => "MaxIters",
            SolveStatus::BacktrackCapHit => "BacktrackCapHit",
            SolveStatus::Stationary => "Stationary",
        }
    }
}

#[derive(Clone, Debug)]
pub struct SolveResult<P> {
    pub final_state: P,
    pub final_value: f64,
    pub trace: Vec<IterationRecord>,
    pub status: SolveStatus,
    /// Iterates whose smallest eigenvalue (entry) fell below `eig_floor`.
    pub floor_hits: usize,
}

/// Outcome of one Armijo search. When `accepted` is false the search ran
/// out of backtracks and `next` is the last rejected candidate.
#[derive(Clone, Debug)]
pub struct LineSearch<P> {
    pub alpha: f64,
    pub backtracks: usize,
    pub next: P,
    pub next_value: f64,
    pub accepted: bool,
}

/// The feasible set together with its mirror map.
pub trait Geometry {
    type Point: Clone;
    type Grad;

    /// `x(alpha)`, the normalized exponentiated step.
    fn step(x: &Self::Point, g: &Self::Grad, alpha: f64) -> Result<Self::Point>;
    /// Bregman divergence of the entropy, `D(a, b)`.
    fn divergence(a: &Self::Point, b: &Self::Point) -> Result<f64>;
    /// `<g, a - b>`.
    fn pairing(g: &Self::Grad, a: &Self::Point, b: &Self::Point) -> f64;
    /// `lambda_max(g) - lambda_min(g)`.
    fn width(g: &Self::Grad) -> Result<f64>;
    fn min_entry(x: &Self::Point) -> f64;
}

/// Density matrices (and, restricted to real symmetric data, the
/// spectrahedron).
pub struct DensityGeometry;

/// The probability simplex.
pub struct SimplexGeometry;

impl Geometry for DensityGeometry {
    type Point = DensityState;
    type Grad = HermitianOperator;

    fn step(x: &DensityState, g: &HermitianOperator, alpha: f64) -> Result<DensityState> {
        eg_step(x, g, alpha)
    }

    fn divergence(a: &DensityState, b: &DensityState) -> Result<f64> {
        quantum_relative_entropy(a, b)
    }

    fn pairing(g: &HermitianOperator, a: &DensityState, b: &DensityState) -> f64 {
        g.inner(&(a.matrix() - b.matrix())).unwrap_or(f64::NAN)
    }

    fn width(g: &HermitianOperator) -> Result<f64> {
        g.spectral_width()
    }

    fn min_entry(x: &DensityState) -> f64 {
        x.min_eigenvalue()
    }
}

impl Geometry for SimplexGeometry {
    type Point = ProbabilityVector;
    type Grad = Vec<f64>;

    fn step(x: &ProbabilityVector, g: &Vec<f64>, alpha: f64) -> Result<ProbabilityVector> {
        eg_step_simplex(x, g, alpha)
    }

    fn divergence(a: &ProbabilityVector, b: &ProbabilityVector) -> Result<f64> {
        classical_relative_entropy(a, b)
    }

    fn pairing(g: &Vec<f64>, a: &ProbabilityVector, b: &ProbabilityVector) -> f64 {
        g.iter()
            .zip(a.as_slice().iter().zip(b.as_slice()))
            .map(|(gi, (ai, bi))| gi * (ai - bi))
            .sum()
    }

    fn width(g: &Vec<f64>) -> Result<f64> {
        let lo = g.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = g.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok(hi - lo)
    }

    fn min_entry(x: &ProbabilityVector) -> f64 {
        x.min_entry()
    }
}

/// `rho(alpha) = exp(log rho - alpha g) / tr exp(log rho - alpha g)`.
///
/// The identity component of `g` is removed first; it cancels in the
/// normalization. When nothing remains the step returns `rho` unchanged.
pub fn eg_step(rho: &DensityState, g: &HermitianOperator, alpha: f64) -> Result<DensityState> {
    if g.dim() != rho.dim() {
        return Err(Error::InvalidInput(format!("gradient dimension {} vs state {}", g.dim(), rho.dim())));
    }
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::InvalidInput(format!("step size must be positive, got {alpha}")));
    }
    let centered = g.traceless_part();
    if centered.is_zero() {
        return Ok(rho.clone());
    }
    let exponent = rho.exponent() - &centered.scale(alpha);
    Ok(DensityState::from_exponent(&exponent)?.flag_below(DEFAULT_EIG_FLOOR))
}

/// Entrywise `x_i exp(-alpha g_i) / Z`.
pub fn eg_step_simplex(x: &ProbabilityVector, g: &[f64], alpha: f64) -> Result<ProbabilityVector> {
    if g.len() != x.dim() {
        return Err(Error::InvalidInput(format!("gradient length {} vs point {}", g.len(), x.dim())));
    }
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::InvalidInput(format!("step size must be positive, got {alpha}")));
    }
    let mean = g.iter().sum::<f64>() / g.len() as f64;
    if g.iter().all(|&gi| gi - mean == 0.0) {
        return Ok(x.clone());
    }
    let logs: Vec<f64> = x
        .logs()
        .iter()
        .zip(g)
        .map(|(l, gi)| l - alpha * (gi - mean))
        .collect();
    ProbabilityVector::from_log_weights(&logs)
}

fn line_search<G: Geometry>(
    x: &G::Point,
    fx: f64,
    grad: &G::Grad,
    first: Option<G::Point>,
    cfg: &SolverConfig,
    value: &dyn Fn(&G::Point) -> f64,
) -> LineSearch<G::Point> {
    let mut first = first;
    let mut last: Option<(G::Point, f64)> = None;
    for j in 0..=cfg.max_backtracks {
        let alpha = cfg.step_size(j);
        let candidate = match first.take() {
            Some(c) if j == 0 => Ok(c),
            _ => G::step(x, grad, alpha),
        };
        let Ok(candidate) = candidate else { continue };
        let fv = value(&candidate);
        let rhs = fx + cfg.tau * G::pairing(grad, &candidate, x);
        // equality passes; +inf and NaN fail
        if fv <= rhs {
            return LineSearch { alpha, backtracks: j, next: candidate, next_value: fv, accepted: true };
        }
        last = Some((candidate, fv));
    }
    let (next, next_value) = last.unwrap_or_else(|| (x.clone(), fx));
    LineSearch {
        alpha: cfg.step_size(cfg.max_backtracks),
        backtracks: cfg.max_backtracks,
        next,
        next_value,
        accepted: false,
    }
}

fn drive<G: Geometry>(
    x0: &G::Point,
    cfg: &SolverConfig,
    value: &dyn Fn(&G::Point) -> f64,
    gradient: &dyn Fn(&G::Point) -> Result<G::Grad>,
    sink: &mut dyn FnMut(&IterationRecord, &G::Point),
) -> Result<SolveResult<G::Point>> {
    cfg.validate()?;
    let mut fx = value(x0);
    if !fx.is_finite() {
        return Err(Error::Domain("initial point is outside the objective's domain".into()));
    }
    let mut x = x0.clone();
    let mut trace = Vec::new();
    let mut floor_hits = 0;
    if cfg.max_iters == 0 {
        return Ok(SolveResult { final_state: x, final_value: fx, trace, status: SolveStatus::MaxIters, floor_hits });
    }
    let mut grad = gradient(&x)?;
    let mut delta = G::width(&grad)?;
    let mut bar = G::step(&x, &grad, cfg.alpha_bar)?;
    let mut status = SolveStatus::MaxIters;

    for k in 1..=cfg.max_iters {
        let ls = line_search::<G>(&x, fx, &grad, Some(bar), cfg, value);
        if !ls.accepted {
            status = SolveStatus::BacktrackCapHit;
            break;
        }
        let f_prev = fx;
        x = ls.next;
        fx = ls.next_value;
        let next_grad = gradient(&x)?;
        bar = G::step(&x, &next_grad, cfg.alpha_bar)?;
        let gap = G::divergence(&bar, &x)?;
        let min_eig = G::min_entry(&x);
        if min_eig < cfg.eig_floor {
            floor_hits += 1;
        }
        let record = IterationRecord {
            k,
            f_value: fx,
            alpha_k: ls.alpha,
            backtracks: ls.backtracks,
            delta_k: delta,
            bregman_gap_bar: gap,
            min_eig,
        };
        sink(&record, &x);
        trace.push(record);
        if gap <= cfg.stop_tol {
            status = SolveStatus::Stationary;
            break;
        }
        if (f_prev - fx).abs() <= cfg.stop_tol * fx.abs().max(1.0) {
            status = SolveStatus::Converged;
            break;
        }
        grad = next_grad;
        delta = G::width(&grad)?;
    }
    Ok(SolveResult { final_state: x, final_value: fx, trace, status, floor_hits })
}

/// One Armijo search from `rho` along the EG path.
pub fn armijo_search(rho: &DensityState, f: &dyn Objective, cfg: &SolverConfig) -> Result<LineSearch<DensityState>> {
    cfg.validate()?;
    let fx = f.value(rho);
    if !fx.is_finite() {
        return Err(Error::Domain("point is outside the objective's domain".into()));
    }
    let grad = f.gradient(rho)?;
    let mut ls = line_search::<DensityGeometry>(rho, fx, &grad, None, cfg, &|p| f.value(p));
    ls.next = ls.next.flag_below(cfg.eig_floor);
    Ok(ls)
}

/// Entrywise counterpart of [`armijo_search`].
pub fn armijo_search_simplex(
    x: &ProbabilityVector,
    f: &dyn VectorObjective,
    cfg: &SolverConfig,
) -> Result<LineSearch<ProbabilityVector>> {
    cfg.validate()?;
    let fx = f.value(x);
    if !fx.is_finite() {
        return Err(Error::Domain("point is outside the objective's domain".into()));
    }
    let grad = f.gradient(x)?;
    Ok(line_search::<SimplexGeometry>(x, fx, &grad, None, cfg, &|p| f.value(p)))
}

pub fn solve(rho0: &DensityState, f: &dyn Objective, cfg: &SolverConfig) -> Result<SolveResult<DensityState>> {
    solve_observed(rho0, f, cfg, &mut |_, _| {})
}

/// [`solve`], calling `sink` with every trace row and the iterate it
/// describes.
pub fn solve_observed(
    rho0: &DensityState,
    f: &dyn Objective,
    cfg: &SolverConfig,
    sink: &mut dyn FnMut(&IterationRecord, &DensityState),
) -> Result<SolveResult<DensityState>> {
    if rho0.dim() != f.dim() {
        return Err(Error::InvalidInput(format!("state dimension {} vs objective {}", rho0.dim(), f.dim())));
    }
    let mut result = drive::<DensityGeometry>(rho0, cfg, &|p| f.value(p), &|p| f.gradient(p), sink)?;
    result.final_state = result.final_state.flag_below(cfg.eig_floor);
    Ok(result)
}

pub fn solve_simplex(
    x0: &ProbabilityVector,
    f: &dyn VectorObjective,
    cfg: &SolverConfig,
) -> Result<SolveResult<ProbabilityVector>> {
    solve_simplex_observed(x0, f, cfg, &mut |_, _| {})
}

pub fn solve_simplex_observed(
    x0: &ProbabilityVector,
    f: &dyn VectorObjective,
    cfg: &SolverConfig,
    sink: &mut dyn FnMut(&IterationRecord, &ProbabilityVector),
) -> Result<SolveResult<ProbabilityVector>> {
    if x0.dim() != f.dim() {
        return Err(Error::InvalidInput(format!("point dimension {} vs objective {}", x0.dim(), f.dim())));
    }
    if !x0.is_strictly_positive() {
        return Err(Error::Domain("initial point must be strictly positive".into()));
    }
    drive::<SimplexGeometry>(x0, cfg, &|p| f.value(p), &|p| f.gradient(p), sink)
}

pub const TRACE_HEADER: &str = "k,f,alpha,backtracks,delta,bregman_gap_bar,min_eig";

/// 17 significant digits.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_trace_csv<W: Write>(records: &[IterationRecord], mut out: W) -> Result<()> {
    writeln!(out, "{TRACE_HEADER}")?;
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.k,
            format_float(r.f_value),
            format_float(r.alpha_k),
            r.backtracks,
            format_float(r.delta_k),
            format_float(r.bregman_gap_bar),
            format_float(r.min_eig)
        )?;
    }
    Ok(())
}
