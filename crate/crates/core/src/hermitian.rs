//! Dense Hermitian matrices and their spectral calculus.
//!
//! Every operator is symmetrized on construction, `A <- (A + A^H) / 2`, so
//! round-off from upstream arithmetic never leaks a non-Hermitian part into
//! the eigensolver. Spectral decompositions are returned with eigenvalues in
//! ascending order.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Relative tolerance used to group numerically equal eigenvalues.
pub const EIGEN_GROUP_RTOL: f64 = 1e-10;

const EIGEN_EPS: f64 = 1e-15;
const EIGEN_MAX_SWEEPS: usize = 10_000;

#[derive(Clone, Debug, PartialEq)]
pub struct HermitianOperator {
    data: DMatrix<C64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SchattenP {
    One,
    Two,
    Infinity,
}

impl HermitianOperator {
    /// Wraps a square complex matrix, replacing it by its Hermitian part.
    pub fn new(matrix: DMatrix<C64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::InvalidInput(format!(
                "operator must be square, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if matrix.nrows() == 0 {
            return Err(Error::InvalidInput("operator dimension must be positive".into()));
        }
        let data = (&matrix + matrix.adjoint()).scale(0.5);
        Ok(Self { data })
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let d = rows.len();
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::InvalidInput("rows must form a square matrix".into()));
        }
        Self::new(DMatrix::from_fn(d, d, |i, j| rows[i][j]))
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let d = diag.len();
        assert!(d > 0, "diagonal must be non-empty");
        Self {
            data: DMatrix::from_fn(d, d, |i, j| if i == j { C64::new(diag[i], 0.0) } else { C64::new(0.0, 0.0) }),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::scaled_identity(dim, 1.0)
    }

    pub fn zeros(dim: usize) -> Self {
        Self::scaled_identity(dim, 0.0)
    }

    pub fn scaled_identity(dim: usize, c: f64) -> Self {
        assert!(dim > 0, "dimension must be positive");
        Self::from_real_diagonal(&vec![c; dim])
    }

    /// Builds `V diag(values) V^H` from a unitary `V`.
    pub fn from_eigensystem(values: &[f64], vectors: &DMatrix<C64>) -> Self {
        let d = values.len();
        let mut scaled = vectors.clone();
        for (j, &v) in values.iter().enumerate() {
            for i in 0..d {
                scaled[(i, j)] *= v;
            }
        }
        let product = &scaled * vectors.adjoint();
        Self {
            data: (&product + product.adjoint()).scale(0.5),
        }
    }

    /// Rank-one projector `v v^H` scaled by `weight`.
    pub fn outer(v: &[C64], weight: f64) -> Self {
        let d = v.len();
        Self::new(DMatrix::from_fn(d, d, |i, j| v[i] * v[j].conj() * weight))
            .expect("outer product of a non-empty vector is square")
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.data
    }

    pub fn entry(&self, i: usize, j: usize) -> C64 {
        self.data[(i, j)]
    }

    pub fn rows(&self) -> Vec<Vec<C64>> {
        (0..self.dim())
            .map(|i| (0..self.dim()).map(|j| self.data[(i, j)]).collect())
            .collect()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|z| z.re == 0.0 && z.im == 0.0)
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.data[(i, i)].re).sum()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.data[(i, i)].re).collect()
    }

    pub fn scale(&self, c: f64) -> Self {
        Self { data: self.data.scale(c) }
    }

    /// `self + c I`.
    pub fn shift(&self, c: f64) -> Self {
        let mut data = self.data.clone();
        for i in 0..self.dim() {
            data[(i, i)] += c;
        }
        Self { data }
    }

    /// Removes the multiple of the identity, leaving a traceless operator.
    pub fn traceless_part(&self) -> Self {
        self.shift(-self.trace() / self.dim() as f64)
    }

    /// `U A U^H`.
    pub fn conjugate_by(&self, unitary: &DMatrix<C64>) -> Result<Self> {
        self.check_dim(unitary.nrows())?;
        Self::new(unitary * &self.data * unitary.adjoint())
    }

    /// Hilbert-Schmidt inner product `tr(A^H B)`.
    pub fn inner(&self, other: &Self) -> Result<f64> {
        self.check_dim(other.dim())?;
        Ok(self
            .data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| a.re * b.re + a.im * b.im)
            .sum())
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn schatten_norm(&self, p: SchattenP) -> Result<f64> {
        match p {
            SchattenP::Two => Ok(self.frobenius_norm()),
            SchattenP::One => Ok(self.eigenvalues()?.iter().map(|x| x.abs()).sum()),
            SchattenP::Infinity => Ok(self.eigenvalues()?.iter().fold(0.0_f64, |m, x| m.max(x.abs()))),
        }
    }

    /// Smallest and largest eigenvalues.
    pub fn eigen_extremes(&self) -> Result<(f64, f64)> {
        let ev = self.eigenvalues()?;
        Ok((ev[0], ev[ev.len() - 1]))
    }

    /// `lambda_max - lambda_min`.
    pub fn spectral_width(&self) -> Result<f64> {
        let (lo, hi) = self.eigen_extremes()?;
        Ok(hi - lo)
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        Ok(self.spectral_decompose()?.eigenvalues)
    }

    pub fn spectral_decompose(&self) -> Result<SpectralDecomposition> {
        if !self.is_finite() {
            return Err(Error::InvalidInput("operator has non-finite entries".into()));
        }
        let eig = self
            .data
            .clone()
            .try_symmetric_eigen(EIGEN_EPS, EIGEN_MAX_SWEEPS)
            .ok_or(Error::NoConvergence)?;
        let d = self.dim();
        let mut order: Vec<usize> = (0..d).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let eigenvalues = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let eigenvectors = DMatrix::from_fn(d, d, |i, j| eig.eigenvectors[(i, order[j])]);
        Ok(SpectralDecomposition { eigenvalues, eigenvectors })
    }

    /// Applies a scalar function through the spectral decomposition.
    pub fn matrix_function(&self, g: impl Fn(f64) -> f64) -> Result<Self> {
        self.spectral_decompose()?.apply(g)
    }

    pub fn exp(&self) -> Result<Self> {
        self.matrix_function(f64::exp)
    }

    pub fn log(&self) -> Result<Self> {
        self.matrix_function(|x| if x > 0.0 { x.ln() } else { f64::NAN })
    }

    pub fn sqrt(&self) -> Result<Self> {
        self.matrix_function(|x| if x >= 0.0 { x.sqrt() } else { f64::NAN })
    }

    fn check_dim(&self, other: usize) -> Result<()> {
        if self.dim() != other {
            return Err(Error::InvalidInput(format!(
                "dimension mismatch: {} vs {}",
                self.dim(),
                other
            )));
        }
        Ok(())
    }
}

impl Add for &HermitianOperator {
    type Output = HermitianOperator;
    fn add(self, rhs: Self) -> HermitianOperator {
        assert_eq!(self.dim(), rhs.dim(), "dimension mismatch");
        HermitianOperator { data: &self.data + &rhs.data }
    }
}

impl Sub for &HermitianOperator {
    type Output = HermitianOperator;
    fn sub(self, rhs: Self) -> HermitianOperator {
        assert_eq!(self.dim(), rhs.dim(), "dimension mismatch");
        HermitianOperator { data: &self.data - &rhs.data }
    }
}

impl Mul<f64> for &HermitianOperator {
    type Output = HermitianOperator;
    fn mul(self, rhs: f64) -> HermitianOperator {
        self.scale(rhs)
    }
}

impl Neg for &HermitianOperator {
    type Output = HermitianOperator;
    fn neg(self) -> HermitianOperator {
        self.scale(-1.0)
    }
}

/// Eigenvalues (ascending) and the unitary whose columns are the paired
/// eigenvectors.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: DMatrix<C64>,
}

/// A block of numerically equal eigenvalues and the columns spanning its
/// eigenspace.
#[derive(Clone, Debug)]
pub struct EigenGroup {
    pub value: f64,
    pub indices: Vec<usize>,
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn reconstruct(&self) -> HermitianOperator {
        HermitianOperator::from_eigensystem(&self.eigenvalues, &self.eigenvectors)
    }

    /// `V diag(g(lambda)) V^H`; fails if `g` is not finite on the spectrum.
    pub fn apply(&self, g: impl Fn(f64) -> f64) -> Result<HermitianOperator> {
        let mapped: Vec<f64> = self.eigenvalues.iter().map(|&x| g(x)).collect();
        if let Some((x, _)) = self
            .eigenvalues
            .iter()
            .zip(&mapped)
            .find(|(_, y)| !y.is_finite())
        {
            return Err(Error::Domain(format!("function undefined at eigenvalue {x:e}")));
        }
        Ok(HermitianOperator::from_eigensystem(&mapped, &self.eigenvectors))
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        self.eigenvectors.column(j).iter().copied().collect()
    }

    /// Groups eigenvalues lying within `EIGEN_GROUP_RTOL * max(1, ||A||_inf)`
    /// of their neighbour. Each group's value is the mean of its members.
    pub fn groups(&self) -> Vec<EigenGroup> {
        let scale = self
            .eigenvalues
            .iter()
            .fold(1.0_f64, |m, x| m.max(x.abs()));
        let tol = EIGEN_GROUP_RTOL * scale;
        let mut groups: Vec<EigenGroup> = Vec::new();
        let mut last = f64::NEG_INFINITY;
        for (k, &x) in self.eigenvalues.iter().enumerate() {
            match groups.last_mut() {
                Some(g) if x - last <= tol => g.indices.push(k),
                _ => groups.push(EigenGroup { value: 0.0, indices: vec![k] }),
            }
            last = x;
        }
        for g in &mut groups {
            g.value = g.indices.iter().map(|&k| self.eigenvalues[k]).sum::<f64>() / g.indices.len() as f64;
        }
        groups
    }

    /// Orthogonal projector onto the span of the listed eigenvector columns.
    pub fn projector(&self, indices: &[usize]) -> HermitianOperator {
        let d = self.dim();
        let values: Vec<f64> = (0..d).map(|k| if indices.contains(&k) { 1.0 } else { 0.0 }).collect();
        HermitianOperator::from_eigensystem(&values, &self.eigenvectors)
    }

    /// `||V^H V - I||_F`.
    pub fn unitarity_defect(&self) -> f64 {
        let d = self.dim();
        let gram = self.eigenvectors.adjoint() * &self.eigenvectors;
        (&gram - DMatrix::<C64>::identity(d, d))
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}

/// Numerically stable `log(sum(exp(x)))`.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    m + xs.iter().map(|&x| (x - m).exp()).sum::<f64>().ln()
}

/// Row-major JSON form shared by every file format: an array of rows, each
/// entry a `[re, im]` pair.
pub type ComplexMatrixJson = Vec<Vec<[f64; 2]>>;

impl HermitianOperator {
    pub fn to_json_rows(&self) -> ComplexMatrixJson {
        self.rows()
            .into_iter()
            .map(|r| r.into_iter().map(|z| [z.re, z.im]).collect())
            .collect()
    }

    pub fn from_json_rows(rows: &ComplexMatrixJson) -> Result<Self> {
        let rows: Vec<Vec<C64>> = rows
            .iter()
            .map(|r| r.iter().map(|&[re, im]| C64::new(re, im)).collect())
            .collect();
        Self::from_rows(&rows)
    }
}

impl Serialize for HermitianOperator {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json_rows().serialize(s)
    }
}

impl<'de> Deserialize<'de> for HermitianOperator {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = ComplexMatrixJson::deserialize(d)?;
        Self::from_json_rows(&rows).map_err(serde::de::Error::custom)
    }
}
