//! Feasible iterates on the set of density matrices, stored in the log domain.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::hermitian::{log_sum_exp, HermitianOperator, SpectralDecomposition, C64};

/// Default eigenvalue floor below which a state is flagged.
pub const DEFAULT_EIG_FLOOR: f64 = 1e-13;

/// A unit-trace positive-definite Hermitian matrix `rho = exp(H)`.
///
/// The exponent `H` is kept normalized so that `tr exp(H) = 1`, i.e. it is
/// exactly `log rho`. The eigensystem of `H` is shared with `rho`; the
/// eigenvalues of `rho` are `exp` of the eigenvalues of `H`, so `log rho`
/// never has to be recomputed from a near-singular matrix.
#[derive(Clone, Debug)]
pub struct DensityState {
    exponent: HermitianOperator,
    log_eigenvalues: Vec<f64>,
    eigenvalues: Vec<f64>,
    eigenvectors: DMatrix<C64>,
    density: HermitianOperator,
    flagged: bool,
}

impl DensityState {
    /// Materializes `exp(H) / tr exp(H)`.
    pub fn from_exponent(exponent: &HermitianOperator) -> Result<Self> {
        let spec = exponent.spectral_decompose()?;
        Self::from_exponent_spectrum(spec)
    }

    pub(crate) fn from_exponent_spectrum(spec: SpectralDecomposition) -> Result<Self> {
        let lse = log_sum_exp(&spec.eigenvalues);
        if !lse.is_finite() {
            return Err(Error::Domain("exponent spectrum is not finite".into()));
        }
        let log_eigenvalues: Vec<f64> = spec.eigenvalues.iter().map(|&x| x - lse).collect();
        Ok(Self::assemble(log_eigenvalues, spec.eigenvectors))
    }

    fn assemble(log_eigenvalues: Vec<f64>, eigenvectors: DMatrix<C64>) -> Self {
        let eigenvalues: Vec<f64> = log_eigenvalues.iter().map(|x| x.exp()).collect();
        let exponent = HermitianOperator::from_eigensystem(&log_eigenvalues, &eigenvectors);
        let density = HermitianOperator::from_eigensystem(&eigenvalues, &eigenvectors);
        Self {
            exponent,
            log_eigenvalues,
            eigenvalues,
            eigenvectors,
            density,
            flagged: false,
        }
    }

    /// Takes a positive-definite matrix with unit trace (within `1e-8`; the
    /// trace is renormalized exactly).
    pub fn from_density(rho: &HermitianOperator) -> Result<Self> {
        let tr = rho.trace();
        if (tr - 1.0).abs() > 1e-8 {
            return Err(Error::InvalidInput(format!("density must have unit trace, got {tr}")));
        }
        let spec = rho.spectral_decompose()?;
        if spec.eigenvalues[0] <= 0.0 {
            return Err(Error::Domain(format!(
                "density is singular (min eigenvalue {:e})",
                spec.eigenvalues[0]
            )));
        }
        let total: f64 = spec.eigenvalues.iter().sum();
        let logs = spec.eigenvalues.iter().map(|&x| (x / total).ln()).collect();
        Ok(Self::assemble(logs, spec.eigenvectors))
    }

    /// `diag(p)` for a strictly positive probability vector.
    pub fn from_diagonal(p: &[f64]) -> Result<Self> {
        if p.is_empty() || p.iter().any(|&x| !(x > 0.0) || !x.is_finite()) {
            return Err(Error::Domain("diagonal entries must be strictly positive".into()));
        }
        let total: f64 = p.iter().sum();
        if (total - 1.0).abs() > 1e-8 {
            return Err(Error::InvalidInput(format!("diagonal must sum to 1, got {total}")));
        }
        let d = p.len();
        let mut order: Vec<usize> = (0..d).collect();
        order.sort_by(|&a, &b| p[a].total_cmp(&p[b]));
        let logs = order.iter().map(|&k| (p[k] / total).ln()).collect();
        let vectors = DMatrix::from_fn(d, d, |i, j| {
            if i == order[j] { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) }
        });
        Ok(Self::assemble(logs, vectors))
    }

    /// The maximally mixed state `I / d`.
    pub fn maximally_mixed(dim: usize) -> Self {
        assert!(dim > 0, "dimension must be positive");
        let logs = vec![-(dim as f64).ln(); dim];
        Self::assemble(logs, DMatrix::identity(dim, dim))
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `log rho`.
    pub fn exponent(&self) -> &HermitianOperator {
        &self.exponent
    }

    /// `rho` as a matrix.
    pub fn matrix(&self) -> &HermitianOperator {
        &self.density
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn log_eigenvalues(&self) -> &[f64] {
        &self.log_eigenvalues
    }

    pub fn eigenvectors(&self) -> &DMatrix<C64> {
        &self.eigenvectors
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues[0]
    }

    /// `log det rho`, from the log-domain spectrum.
    pub fn log_det(&self) -> f64 {
        self.log_eigenvalues.iter().sum()
    }

    /// `rho^{-1}`.
    pub fn inverse(&self) -> HermitianOperator {
        let inv: Vec<f64> = self.log_eigenvalues.iter().map(|x| (-x).exp()).collect();
        HermitianOperator::from_eigensystem(&inv, &self.eigenvectors)
    }

    /// True if the eigenvalue floor was crossed when this state was produced.
    pub fn is_flagged(&self) -> bool {
        self.flagged
    }

    pub(crate) fn flag_below(mut self, floor: f64) -> Self {
        self.flagged = self.min_eigenvalue() < floor;
        self
    }

    /// `U rho U^H`.
    pub fn conjugate_by(&self, unitary: &DMatrix<C64>) -> Result<Self> {
        if unitary.nrows() != self.dim() {
            return Err(Error::InvalidInput("unitary dimension mismatch".into()));
        }
        Ok(Self::assemble(self.log_eigenvalues.clone(), unitary * &self.eigenvectors))
    }

    /// Convex combination `(1 - t) self + t other`.
    pub fn mix(&self, other: &Self, t: f64) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::InvalidInput("dimension mismatch".into()));
        }
        Self::from_density(&(&self.density.scale(1.0 - t) + &other.density.scale(t)))
    }
}
