//! Numerical certificates for the log-partition function
//! `phi(alpha) = log tr exp(log rho - alpha grad f(rho))` and the inequalities
//! built on it.
//!
//! With `G = -grad f(rho)` and `H_alpha = log rho + alpha G`, the derivatives
//! of `phi` are the moments of a random variable `eta_alpha` taking the
//! eigenvalue `lambda_j` of `G` with probability
//! `tr(P_j exp(H_alpha)) / tr exp(H_alpha)`. The checks below compare those
//! moments against independent evaluations (relative entropies of the EG
//! step, finite differences of `phi`) and against the closed-form bounds
//! that follow from `|phi'''| <= Delta phi''`.

pub mod bounds;
pub mod divided;
pub mod finite_diff;
pub mod suite;

use rand::Rng;
use serde::Serialize;

use crate::density::DensityState;
use crate::entropy::quantum_relative_entropy;
use crate::error::{Error, Result};
use crate::hermitian::{log_sum_exp, C64, EigenGroup, HermitianOperator, SchattenP, SpectralDecomposition};
use crate::objectives::Objective;
use crate::random::random_density;
use crate::solver::eg_step;

use bounds::{chi, log_chi, lower_kernel, upper_kernel};
use divided::{exp_dd2, exp_dd3};

/// Relative slack for the Bregman-gap identity.
pub const BREGMAN_IDENTITY_RTOL: f64 = 1e-8;
/// Absolute slack for the sandwich ordering.
pub const SANDWICH_ATOL: f64 = 1e-9;
/// Lower sandwich bound must exceed `-LOWER_BOUND_ATOL`.
pub const LOWER_BOUND_ATOL: f64 = 1e-12;
pub const RATIO_RTOL: f64 = 1e-8;
pub const RATIO_ATOL: f64 = 1e-12;
pub const KAPPA_RTOL: f64 = 1e-9;
pub const VARIANCE_ATOL: f64 = 1e-10;
pub const SELF_CONCORDANCE_ATOL: f64 = 1e-10;
pub const INNER_PRODUCT_ATOL: f64 = 1e-10;
pub const FIXED_POINT_MOVEMENT: f64 = 1e-10;
pub const OPTIMALITY_ATOL: f64 = 1e-8;
pub const FD_RTOL: f64 = 1e-5;

/// `phi'`, `phi''`, `phi'''` at one `alpha`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PhiDerivatives {
    pub first: f64,
    pub second: f64,
    pub third: f64,
}

/// The log-partition function of one `(rho, grad f(rho))` pair.
#[derive(Clone, Debug)]
pub struct LogPartitionProbe {
    base: DensityState,
    gradient: HermitianOperator,
    direction: HermitianOperator,
    spectrum: SpectralDecomposition,
    groups: Vec<EigenGroup>,
    delta: f64,
}

impl LogPartitionProbe {
    pub fn new(base: DensityState, gradient: HermitianOperator) -> Result<Self> {
        if base.dim() != gradient.dim() {
            return Err(Error::InvalidInput("gradient and state dimensions differ".into()));
        }
        let direction = gradient.scale(-1.0);
        let spectrum = direction.spectral_decompose()?;
        let groups = spectrum.groups();
        let delta = if groups.len() == 1 {
            0.0
        } else {
            spectrum.eigenvalues[spectrum.dim() - 1] - spectrum.eigenvalues[0]
        };
        Ok(Self { base, gradient, direction, spectrum, groups, delta })
    }

    pub fn from_objective(base: DensityState, f: &dyn Objective) -> Result<Self> {
        let g = f.gradient(&base)?;
        Self::new(base, g)
    }

    pub fn base(&self) -> &DensityState {
        &self.base
    }

    pub fn gradient(&self) -> &HermitianOperator {
        &self.gradient
    }

    /// `G = -grad f(rho)`.
    pub fn direction(&self) -> &HermitianOperator {
        &self.direction
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    /// `lambda_max(grad f) - lambda_min(grad f)`; exactly 0 when all
    /// eigenvalues fall in one group.
    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn is_degenerate(&self) -> bool {
        self.groups.len() == 1
    }

    /// Distinct eigenvalues of `G`.
    pub fn support(&self) -> Vec<f64> {
        self.groups.iter().map(|g| g.value).collect()
    }

    fn exponent_at(&self, alpha: f64) -> HermitianOperator {
        self.base.exponent() + &self.direction.scale(alpha)
    }

    /// `phi(alpha) = log tr exp(H_alpha)`; `H_alpha` is formed as a matrix
    /// sum and decomposed, so `rho` and `G` need not commute.
    pub fn phi(&self, alpha: f64) -> Result<f64> {
        let spec = self.exponent_at(alpha).spectral_decompose()?;
        Ok(log_sum_exp(&spec.eigenvalues))
    }

    /// The Gibbs state `exp(H_alpha) / tr exp(H_alpha)`.
    pub fn gibbs_state(&self, alpha: f64) -> Result<DensityState> {
        DensityState::from_exponent(&self.exponent_at(alpha))
    }

    /// Law of `eta_alpha` over the grouped eigenvalues of `G`:
    /// `tr(P_j sigma_alpha)`.
    pub fn weights(&self, alpha: f64) -> Result<Vec<f64>> {
        let sigma = self.gibbs_state(alpha)?;
        let overlap = sigma.eigenvectors().adjoint() * &self.spectrum.eigenvectors;
        let d = self.dim();
        let per_vector: Vec<f64> = (0..d)
            .map(|k| (0..d).map(|i| sigma.eigenvalues()[i] * overlap[(i, k)].norm_sqr()).sum())
            .collect();
        let raw: Vec<f64> = self
            .groups
            .iter()
            .map(|g| g.indices.iter().map(|&k| per_vector[k]).sum())
            .collect();
        let total: f64 = raw.iter().sum();
        Ok(raw.into_iter().map(|w| w / total).collect())
    }

    /// Mean, variance and third central moment of `eta_alpha`. The mean is
    /// always `phi'`; the higher moments equal `phi''` and `phi'''` only when
    /// `rho` and `G` commute (see [`Self::derivatives`]).
    pub fn moments(&self, alpha: f64) -> Result<PhiDerivatives> {
        let w = self.weights(alpha)?;
        let support = self.support();
        let mean: f64 = w.iter().zip(&support).map(|(p, x)| p * x).sum();
        let (mut m2, mut m3) = (0.0, 0.0);
        for (p, x) in w.iter().zip(&support) {
            let c = x - mean;
            m2 += p * c * c;
            m3 += p * c * c * c;
        }
        Ok(PhiDerivatives { first: mean, second: m2, third: m3 })
    }

    /// Derivatives of `phi`. With `H_alpha = sum_i mu_i |v_i><v_i|` and
    /// `C = G - phi'(alpha) I` written in that basis,
    /// `phi'' = sum_ij |C_ij|^2 exp[mu_i, mu_j] / Z` and
    /// `phi''' = 2 sum_ijk C_ij C_jk C_ki exp[mu_i, mu_j, mu_k] / Z`.
    /// These reduce to the moments of `eta_alpha` when `rho` and `G` commute.
    pub fn derivatives(&self, alpha: f64) -> Result<PhiDerivatives> {
        let spec = self.exponent_at(alpha).spectral_decompose()?;
        let top = spec.eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mu: Vec<f64> = spec.eigenvalues.iter().map(|m| m - top).collect();
        let z: f64 = mu.iter().map(|m| m.exp()).sum();
        let g = spec.eigenvectors.adjoint() * self.direction.matrix() * &spec.eigenvectors;
        let d = self.dim();
        let first = (0..d).map(|i| g[(i, i)].re * mu[i].exp()).sum::<f64>() / z;
        let mut c = g;
        for i in 0..d {
            c[(i, i)] -= C64::new(first, 0.0);
        }
        let mut second = 0.0;
        let mut third = 0.0;
        for i in 0..d {
            for j in 0..d {
                second += c[(i, j)].norm_sqr() * exp_dd2(mu[i], mu[j]);
                let cij = c[(i, j)];
                for k in 0..d {
                    third += (cij * c[(j, k)] * c[(k, i)]).re * exp_dd3(mu[i], mu[j], mu[k]);
                }
            }
        }
        Ok(PhiDerivatives { first, second: second / z, third: 2.0 * third / z })
    }

    /// `D(rho(alpha), rho) = phi(0) - phi(alpha) + alpha phi'(alpha)`.
    pub fn bregman_gap(&self, alpha: f64) -> Result<f64> {
        let mean = self.moments(alpha)?.first;
        Ok(self.phi(0.0)? - self.phi(alpha)? + alpha * mean)
    }

    /// `D(rho(alpha), rho)` evaluated through the EG step and the relative
    /// entropy, independently of `phi`.
    pub fn bregman_gap_direct(&self, alpha: f64) -> Result<f64> {
        let next = eg_step(&self.base, &self.gradient, alpha)?;
        quantum_relative_entropy(&next, &self.base)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Sandwich {
    pub lower: f64,
    pub gap: f64,
    pub upper: f64,
    pub degenerate: bool,
}

impl Sandwich {
    pub fn holds(&self) -> bool {
        self.lower <= self.gap + SANDWICH_ATOL
            && self.gap <= self.upper + SANDWICH_ATOL
            && self.lower >= -LOWER_BOUND_ATOL
    }

    /// Smallest slack among the three sandwich conditions.
    pub fn margin(&self) -> f64 {
        (self.gap + SANDWICH_ATOL - self.lower)
            .min(self.upper + SANDWICH_ATOL - self.gap)
            .min(self.lower + LOWER_BOUND_ATOL)
    }
}

/// Lower and upper self-concordance bounds around the Bregman gap:
/// `(e^{-D a} + D a - 1) phi''(a) / D^2 <= gap <= (e^{D a} - D a - 1) phi''(a) / D^2`.
pub fn sandwich_check(probe: &LogPartitionProbe, alpha: f64) -> Result<Sandwich> {
    check_step(alpha)?;
    if probe.is_degenerate() {
        return Ok(Sandwich { lower: 0.0, gap: 0.0, upper: 0.0, degenerate: true });
    }
    let x = probe.delta() * alpha;
    let second = probe.derivatives(alpha)?.second;
    let gap = probe.bregman_gap(alpha)?;
    Ok(Sandwich {
        lower: alpha * alpha * lower_kernel(x) * second,
        gap,
        upper: alpha * alpha * upper_kernel(x) * second,
        degenerate: false,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RatioReport {
    pub ratios: Vec<f64>,
    pub holds: bool,
    /// Largest `ratio[i+1] - (ratio[i] (1 + rtol) + atol)`; non-positive
    /// when the sequence is non-increasing within tolerance.
    pub worst_violation: f64,
}

/// `D(rho(alpha), rho) / (e^{D alpha}(D alpha - 1) + 1)` over an ascending grid.
pub fn ratio_monotonicity_check(probe: &LogPartitionProbe, grid: &[f64]) -> Result<RatioReport> {
    check_grid(grid)?;
    if probe.is_degenerate() {
        return Err(Error::DegenerateDelta);
    }
    let delta = probe.delta();
    let ratios = grid
        .iter()
        .map(|&a| {
            let gap = probe.bregman_gap(a)?;
            Ok(if gap > 0.0 { (gap.ln() - log_chi(delta * a)).exp() } else { 0.0 })
        })
        .collect::<Result<Vec<f64>>>()?;
    let worst_violation = ratios
        .windows(2)
        .map(|w| w[1] - (w[0] * (1.0 + RATIO_RTOL) + RATIO_ATOL))
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(RatioReport { holds: !(worst_violation > 0.0), ratios, worst_violation })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KappaReport {
    pub kappa: f64,
    pub holds: bool,
    /// Smallest `(D(a)/a^2) / (kappa D(alpha_bar)) - 1`; at least
    /// `-KAPPA_RTOL` when the bound holds.
    pub worst_margin: f64,
}

/// `kappa = D^2 / (2 chi(D alpha_bar))`.
pub fn kappa(delta: f64, alpha_bar: f64) -> f64 {
    delta * delta / (2.0 * chi(delta * alpha_bar))
}

/// `D(rho(a), rho) / a^2 >= kappa D(rho(alpha_bar), rho)` for `a` in `(0, alpha_bar]`.
pub fn kappa_bound_check(probe: &LogPartitionProbe, alpha_bar: f64, grid: &[f64]) -> Result<KappaReport> {
    check_step(alpha_bar)?;
    check_grid(grid)?;
    if grid.iter().any(|&a| a > alpha_bar) {
        return Err(Error::InvalidInput("grid must lie in (0, alpha_bar]".into()));
    }
    if probe.is_degenerate() {
        return Err(Error::DegenerateDelta);
    }
    let k = kappa(probe.delta(), alpha_bar);
    let reference = k * probe.bregman_gap(alpha_bar)?;
    let mut worst = f64::INFINITY;
    for &a in grid {
        let lhs = probe.bregman_gap(a)? / (a * a);
        let margin = if reference > 0.0 { lhs / reference - 1.0 } else if lhs >= 0.0 { 0.0 } else { -1.0 };
        worst = worst.min(margin);
    }
    Ok(KappaReport { kappa: k, holds: worst >= -KAPPA_RTOL, worst_margin: worst })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SelfConcordanceReport {
    /// Largest `|phi'''| - D phi''` over the grid.
    pub worst_excess: f64,
    pub holds: bool,
    /// Smallest `tol - (|phi'''| - D phi'')` over the grid.
    pub worst_margin: f64,
}

/// `|phi'''(a)| <= D phi''(a)` along the grid.
pub fn self_concordance_check(probe: &LogPartitionProbe, grid: &[f64]) -> Result<SelfConcordanceReport> {
    let mut worst_excess = f64::NEG_INFINITY;
    let mut worst_margin = f64::INFINITY;
    for &a in grid {
        let d = probe.derivatives(a)?;
        let bound = probe.delta() * d.second;
        let excess = d.third.abs() - bound;
        worst_excess = worst_excess.max(excess);
        worst_margin = worst_margin.min(SELF_CONCORDANCE_ATOL - excess);
    }
    Ok(SelfConcordanceReport { worst_excess, holds: worst_margin >= 0.0, worst_margin })
}

/// Smallest `D^2/4 + tol - phi''(a)` over the grid (variance of a variable
/// confined to an interval of width `D`).
pub fn variance_bound_margin(probe: &LogPartitionProbe, grid: &[f64]) -> Result<f64> {
    let cap = probe.delta() * probe.delta() / 4.0 + VARIANCE_ATOL;
    grid.iter()
        .map(|&a| Ok(cap - probe.derivatives(a)?.second))
        .try_fold(f64::INFINITY, |m, r: Result<f64>| Ok(m.min(r?)))
}

/// `-D(rho(a), rho)/a - <grad f(rho), rho(a) - rho>`; non-negative up to
/// `INNER_PRODUCT_ATOL`.
pub fn inner_product_check(rho: &DensityState, f: &dyn Objective, alpha: f64) -> Result<f64> {
    check_step(alpha)?;
    let g = f.gradient(rho)?;
    let next = eg_step(rho, &g, alpha)?;
    let d = quantum_relative_entropy(&next, rho)?;
    let pairing = g.inner(&(next.matrix() - rho.matrix()))?;
    Ok(-d / alpha - pairing)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FixedPointReport {
    pub is_fixed: bool,
    pub max_movement: f64,
    /// `min <grad f(rho), sigma - rho>` over the sampled states, when fixed.
    pub optimality_margin: Option<f64>,
}

impl FixedPointReport {
    pub fn optimality_holds(&self) -> bool {
        self.optimality_margin.is_none_or(|m| m >= -OPTIMALITY_ATOL)
    }
}

/// `rho(a) = rho` for every grid step, in trace norm; when so, also samples
/// `samples` random states `sigma` and reports the first-order optimality
/// margin.
pub fn fixed_point_check<R: Rng + ?Sized>(
    rho: &DensityState,
    f: &dyn Objective,
    grid: &[f64],
    rng: &mut R,
    samples: usize,
) -> Result<FixedPointReport> {
    check_grid(grid)?;
    let g = f.gradient(rho)?;
    let mut max_movement = 0.0_f64;
    for &a in grid {
        let next = eg_step(rho, &g, a)?;
        max_movement = max_movement.max((next.matrix() - rho.matrix()).schatten_norm(SchattenP::One)?);
    }
    let is_fixed = max_movement <= FIXED_POINT_MOVEMENT;
    let optimality_margin = if is_fixed {
        let mut worst = f64::INFINITY;
        for _ in 0..samples {
            let sigma = random_density(rng, rho.dim());
            worst = worst.min(g.inner(&(sigma.matrix() - rho.matrix()))?);
        }
        Some(worst)
    } else {
        None
    };
    Ok(FixedPointReport { is_fixed, max_movement, optimality_margin })
}

/// `n` points spaced geometrically from `lo` to `hi` inclusive.
pub fn geometric_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && n >= 2);
    let r = (hi / lo).ln() / (n - 1) as f64;
    (0..n).map(|i| if i == n - 1 { hi } else { lo * (r * i as f64).exp() }).collect()
}

fn check_step(alpha: f64) -> Result<()> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::InvalidInput(format!("step must be positive, got {alpha}")));
    }
    Ok(())
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() || grid.iter().any(|&a| !(a > 0.0) || !a.is_finite()) {
        return Err(Error::InvalidInput("grid must be non-empty and strictly positive".into()));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput("grid must be strictly ascending".into()));
    }
    Ok(())
}
