//! Entropy functionals and relative entropies for density matrices and
//! probability vectors.

use serde::{Deserialize, Serialize};

use crate::density::DensityState;
use crate::error::{Error, Result};
use crate::hermitian::SchattenP;

/// A point of the probability simplex. Entries and their logarithms are
/// both kept; a zero entry has logarithm `-inf`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ProbabilityVector {
    probs: Vec<f64>,
    logs: Vec<f64>,
}

impl ProbabilityVector {
    /// Accepts nonnegative finite entries summing to 1 within `1e-9` and
    /// renormalizes exactly.
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidInput("probability vector must be non-empty".into()));
        }
        if entries.iter().any(|&x| !x.is_finite() || x < 0.0) {
            return Err(Error::InvalidInput("entries must be finite and nonnegative".into()));
        }
        let total: f64 = entries.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidInput(format!("entries must sum to 1, got {total}")));
        }
        let probs: Vec<f64> = entries.into_iter().map(|x| x / total).collect();
        let logs = probs.iter().map(|x| x.ln()).collect();
        Ok(Self { probs, logs })
    }

    pub fn uniform(dim: usize) -> Self {
        assert!(dim > 0, "dimension must be positive");
        Self {
            probs: vec![1.0 / dim as f64; dim],
            logs: vec![-(dim as f64).ln(); dim],
        }
    }

    /// Normalizes `exp(log_weights)` with a log-sum-exp shift.
    pub fn from_log_weights(log_weights: &[f64]) -> Result<Self> {
        let lse = crate::hermitian::log_sum_exp(log_weights);
        if !lse.is_finite() {
            return Err(Error::Domain("log weights are not finite".into()));
        }
        let logs: Vec<f64> = log_weights.iter().map(|x| x - lse).collect();
        let probs = logs.iter().map(|x| x.exp()).collect();
        Ok(Self { probs, logs })
    }

    pub fn dim(&self) -> usize {
        self.probs.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.probs
    }

    pub fn logs(&self) -> &[f64] {
        &self.logs
    }

    pub fn min_entry(&self) -> f64 {
        self.probs.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn is_strictly_positive(&self) -> bool {
        self.probs.iter().all(|&x| x > 0.0)
    }

    pub fn l1_distance(&self, other: &Self) -> f64 {
        self.probs.iter().zip(&other.probs).map(|(a, b)| (a - b).abs()).sum()
    }

    /// Embeds as the diagonal density matrix `diag(p)`.
    pub fn to_density(&self) -> Result<DensityState> {
        DensityState::from_diagonal(&self.probs)
    }
}

impl TryFrom<Vec<f64>> for ProbabilityVector {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<ProbabilityVector> for Vec<f64> {
    fn from(p: ProbabilityVector) -> Vec<f64> {
        p.probs
    }
}

/// Negative von Neumann entropy `tr(rho log rho) - tr(rho)`.
pub fn von_neumann_entropy_neg(rho: &DensityState) -> Result<f64> {
    if rho.log_eigenvalues().iter().any(|x| !x.is_finite()) {
        return Err(Error::Domain("state is singular".into()));
    }
    let s: f64 = rho
        .eigenvalues()
        .iter()
        .zip(rho.log_eigenvalues())
        .map(|(p, l)| p * l)
        .sum();
    Ok(s - rho.eigenvalues().iter().sum::<f64>())
}

/// `D(rho, sigma) = tr(rho log rho) - tr(rho log sigma) - tr(rho - sigma)`.
///
/// Evaluated in both eigenbases: with `rho = sum p_i u_i u_i^H` and
/// `sigma = sum q_j v_j v_j^H`, the first two terms are
/// `sum_i p_i sum_j |<u_i, v_j>|^2 (log p_i - log q_j)`.
pub fn quantum_relative_entropy(rho: &DensityState, sigma: &DensityState) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::InvalidInput(format!(
            "dimension mismatch: {} vs {}",
            rho.dim(),
            sigma.dim()
        )));
    }
    if sigma.log_eigenvalues().iter().any(|x| !x.is_finite()) {
        return Err(Error::Domain("second argument is singular".into()));
    }
    let overlap = rho.eigenvectors().adjoint() * sigma.eigenvectors();
    let d = rho.dim();
    let mut total = 0.0;
    for i in 0..d {
        let p = rho.eigenvalues()[i];
        if p == 0.0 {
            continue;
        }
        let lp = rho.log_eigenvalues()[i];
        let inner: f64 = (0..d)
            .map(|j| overlap[(i, j)].norm_sqr() * (lp - sigma.log_eigenvalues()[j]))
            .sum();
        total += p * inner;
    }
    let trace_diff: f64 =
        rho.eigenvalues().iter().sum::<f64>() - sigma.eigenvalues().iter().sum::<f64>();
    Ok(total - trace_diff)
}

/// `sum p_i log(p_i / q_i) - sum (p_i - q_i)` with `0 log 0 = 0`.
pub fn classical_relative_entropy(p: &ProbabilityVector, q: &ProbabilityVector) -> Result<f64> {
    if p.dim() != q.dim() {
        return Err(Error::InvalidInput(format!(
            "dimension mismatch: {} vs {}",
            p.dim(),
            q.dim()
        )));
    }
    let mut total = 0.0;
    for i in 0..p.dim() {
        let (pi, qi) = (p.probs[i], q.probs[i]);
        if pi == 0.0 {
            continue;
        }
        if qi == 0.0 {
            return Err(Error::Domain(format!("q[{i}] = 0 while p[{i}] > 0")));
        }
        total += pi * (p.logs[i] - q.logs[i]);
    }
    let trace_diff: f64 = p.probs.iter().sum::<f64>() - q.probs.iter().sum::<f64>();
    Ok(total - trace_diff)
}

/// `D(rho, sigma) - ||rho - sigma||_1^2 / 2`; nonnegative by Pinsker.
pub fn pinsker_gap(rho: &DensityState, sigma: &DensityState) -> Result<f64> {
    let d = quantum_relative_entropy(rho, sigma)?;
    let l1 = (rho.matrix() - sigma.matrix()).schatten_norm(SchattenP::One)?;
    Ok(d - 0.5 * l1 * l1)
}
