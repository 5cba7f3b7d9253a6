//! Hedged solves along a decreasing sequence of barrier weights.

use serde::Serialize;

use crate::density::DensityState;
use crate::error::{Error, Result};
use crate::objectives::{HedgedQstObjective, MeasurementEnsemble, Objective};
use crate::par::{map_slice, Execution};
use crate::solver::{format_float, solve, SolveStatus, SolverConfig};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub lambda: f64,
    /// Minimized `f_QST - lambda log det`.
    pub hedged_value: f64,
    /// `f_QST` at the hedged minimizer.
    pub unhedged_value: f64,
    pub status: SolveStatus,
    pub iters: usize,
    pub min_eig: f64,
}

pub fn validate_lambdas(lambdas: &[f64]) -> Result<()> {
    if lambdas.is_empty() {
        return Err(Error::InvalidInput("lambda list is empty".into()));
    }
    if lambdas.iter().any(|&l| !(l > 0.0) || !l.is_finite()) {
        return Err(Error::InvalidInput("every lambda must be positive".into()));
    }
    if lambdas.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidInput("lambdas must be strictly descending".into()));
    }
    Ok(())
}

/// Solves each hedged problem from the maximally mixed state. Points are
/// independent and may run concurrently; rows come back in input order.
pub fn lambda_sweep(
    ensemble: &MeasurementEnsemble,
    lambdas: &[f64],
    cfg: &SolverConfig,
    exec: Execution,
) -> Result<Vec<SweepRow>> {
    validate_lambdas(lambdas)?;
    cfg.validate()?;
    let rho0 = DensityState::maximally_mixed(ensemble.dim());
    let rows = map_slice(lambdas, exec, |&lambda| {
        let f = HedgedQstObjective::new(ensemble.clone(), lambda)?;
        let res = solve(&rho0, &f, cfg)?;
        Ok(SweepRow {
            lambda,
            hedged_value: res.final_value,
            unhedged_value: f.unhedged().value(&res.final_state),
            status: res.status,
            iters: res.trace.len(),
            min_eig: res.final_state.min_eigenvalue(),
        })
    });
    rows.into_iter().collect()
}

/// True if the unhedged values never increase by more than `tol` along the
/// sweep.
pub fn is_monotone(rows: &[SweepRow], tol: f64) -> bool {
    rows.windows(2).all(|w| w[1].unhedged_value <= w[0].unhedged_value + tol)
}

pub const SWEEP_HEADER: &str = "lambda,hedged_value,unhedged_value,status,iters,min_eig";

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(SWEEP_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            format_float(r.lambda),
            format_float(r.hedged_value),
            format_float(r.unhedged_value),
            r.status.as_str(),
            r.iters,
            format_float(r.min_eig)
        ));
    }
    out
}
