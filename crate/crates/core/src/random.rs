//! Seeded generators for random operators, states and instances.
//!
//! All randomness flows through [`ChaCha8Rng`]; [`substream`] derives an
//! independent stream per consumer index so batch work can run in any order
//! (or in parallel) and still reproduce bit for bit.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::density::DensityState;
use crate::hermitian::{HermitianOperator, C64};
use crate::objectives::MeasurementEnsemble;

pub type SeededRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream `index` of generator `seed`.
pub fn substream(seed: u64, index: u64) -> SeededRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> DMatrix<C64> {
    DMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re, im)
    })
}

/// Random Hermitian matrix with the given Frobenius norm.
pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, dim: usize, norm: f64) -> HermitianOperator {
    let a = HermitianOperator::new(complex_gaussian(rng, dim, dim)).expect("square");
    let n = a.frobenius_norm();
    a.scale(norm / n)
}

/// Haar-distributed unitary (QR of a complex Gaussian with phase fix).
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> DMatrix<C64> {
    let qr = complex_gaussian(rng, dim, dim).qr();
    let (mut q, r) = qr.unpack();
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// `exp(S) / tr exp(S)` with `S` a random Hermitian of unit Frobenius norm.
pub fn random_density<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> DensityState {
    let s = random_hermitian(rng, dim, 1.0);
    DensityState::from_exponent(&s).expect("finite exponent")
}

/// `A^H A` for complex Gaussian `A`, normalized to unit trace.
pub fn random_psd<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> HermitianOperator {
    let a = complex_gaussian(rng, dim, dim);
    let m = HermitianOperator::new(a.adjoint() * a).expect("square");
    let t = m.trace();
    m.scale(1.0 / t)
}

pub fn random_ensemble<R: Rng + ?Sized>(rng: &mut R, dim: usize, count: usize) -> MeasurementEnsemble {
    let ops = (0..count).map(|_| random_psd(rng, dim)).collect();
    MeasurementEnsemble::new(ops).expect("random PSD operators are valid")
}

/// Strictly positive probability vector with entries drawn from a
/// log-normal profile.
pub fn random_probability<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..dim)
        .map(|_| {
            let z: f64 = rng.sample(StandardNormal);
            (0.5 * z).exp()
        })
        .collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / total).collect()
}

/// Nonnegative, nonzero rows for a log-linear objective.
pub fn random_rows<R: Rng + ?Sized>(rng: &mut R, dim: usize, count: usize) -> Vec<Vec<f64>> {
    (0..count)
        .map(|_| (0..dim).map(|_| rng.random::<f64>() + 0.05).collect())
        .collect()
}
