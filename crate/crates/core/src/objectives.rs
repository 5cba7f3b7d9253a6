//! Objective functions over density matrices and over the simplex.
//!
//! Values outside the effective domain are `+inf`, never an error, so that a
//! line search can treat a blown-up candidate as a failed test and shrink.
//! Gradients outside the domain are a [`Error::Domain`].

use serde::{Deserialize, Serialize};

use crate::density::DensityState;
use crate::entropy::ProbabilityVector;
use crate::error::{Error, Result};
use crate::hermitian::{ComplexMatrixJson, HermitianOperator};

/// Convex objective on density matrices.
pub trait Objective: Send + Sync {
    fn dim(&self) -> usize;

    /// `f(rho)`, or `+inf` outside the effective domain.
    fn value(&self, rho: &DensityState) -> f64;

    fn gradient(&self, rho: &DensityState) -> Result<HermitianOperator>;

    fn in_domain(&self, rho: &DensityState) -> bool {
        self.value(rho).is_finite()
    }
}

/// Convex objective on the probability simplex.
pub trait VectorObjective: Send + Sync {
    fn dim(&self) -> usize;
    fn value(&self, x: &ProbabilityVector) -> f64;
    fn gradient(&self, x: &ProbabilityVector) -> Result<Vec<f64>>;

    fn in_domain(&self, x: &ProbabilityVector) -> bool {
        self.value(x).is_finite()
    }
}

/// Hermitian PSD measurement operators `M_1, ..., M_n`.
#[derive(Clone, Debug)]
pub struct MeasurementEnsemble {
    dim: usize,
    operators: Vec<HermitianOperator>,
}

#[derive(Serialize, Deserialize)]
struct EnsembleFile {
    dim: usize,
    operators: Vec<ComplexMatrixJson>,
}

impl MeasurementEnsemble {
    pub fn new(operators: Vec<HermitianOperator>) -> Result<Self> {
        let Some(first) = operators.first() else {
            return Err(Error::InvalidInput("ensemble needs at least one operator".into()));
        };
        let dim = first.dim();
        let mut any_nonzero = false;
        for (i, m) in operators.iter().enumerate() {
            if m.dim() != dim {
                return Err(Error::InvalidInput(format!("operator {i} has dimension {}, expected {dim}", m.dim())));
            }
            let (lo, _) = m.eigen_extremes()?;
            if lo < -1e-10 {
                return Err(Error::InvalidInput(format!("operator {i} is not PSD (min eigenvalue {lo:e})")));
            }
            any_nonzero |= !m.is_zero();
        }
        if !any_nonzero {
            return Err(Error::InvalidInput("all operators are zero".into()));
        }
        Ok(Self { dim, operators })
    }

    /// Diagonal operators `diag(a_i)` from nonnegative rows.
    pub fn diagonal(rows: &[Vec<f64>]) -> Result<Self> {
        Self::new(rows.iter().map(|r| HermitianOperator::from_real_diagonal(r)).collect())
    }

    /// The two-outcome ensemble `M_1 = e_1 e_1^T`, `M_2 = e_2 e_2^T` on which
    /// `f_QST(diag(x, y)) = -log x - log y`.
    pub fn coordinate_pair() -> Self {
        Self::diagonal(&[vec![1.0, 0.0], vec![0.0, 1.0]]).expect("valid")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn operators(&self) -> &[HermitianOperator] {
        &self.operators
    }

    pub fn to_json(&self) -> Result<String> {
        let file = EnsembleFile {
            dim: self.dim,
            operators: self.operators.iter().map(|m| m.to_json_rows()).collect(),
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: EnsembleFile = serde_json::from_str(text)?;
        let ops = file
            .operators
            .iter()
            .map(HermitianOperator::from_json_rows)
            .collect::<Result<Vec<_>>>()?;
        let ens = Self::new(ops)?;
        if ens.dim != file.dim {
            return Err(Error::InvalidInput(format!("declared dim {} but operators are {}x{}", file.dim, ens.dim, ens.dim)));
        }
        Ok(ens)
    }
}

/// Nonnegative rows `a_1, ..., a_n` for the log-linear family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VectorRows {
    pub dim: usize,
    pub rows: Vec<Vec<f64>>,
}

impl VectorRows {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let dim = rows.first().map(|r| r.len()).unwrap_or(0);
        let v = Self { dim, rows };
        v.validate()?;
        Ok(v)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 || self.rows.is_empty() {
            return Err(Error::InvalidInput("rows must be non-empty".into()));
        }
        for (i, r) in self.rows.iter().enumerate() {
            if r.len() != self.dim {
                return Err(Error::InvalidInput(format!("row {i} has length {}, expected {}", r.len(), self.dim)));
            }
            if r.iter().any(|&x| !x.is_finite() || x < 0.0) {
                return Err(Error::InvalidInput(format!("row {i} must be finite and nonnegative")));
            }
            if r.iter().all(|&x| x == 0.0) {
                return Err(Error::InvalidInput(format!("row {i} is zero")));
            }
        }
        Ok(())
    }
}

fn measurement_traces(ops: &[HermitianOperator], rho: &DensityState) -> Option<Vec<f64>> {
    let mut out = Vec::with_capacity(ops.len());
    for m in ops {
        let t = m.inner(rho.matrix()).ok()?;
        // negative round-off on a PSD pair is treated as the boundary
        if !(t > 0.0) {
            return None;
        }
        out.push(t);
    }
    Some(out)
}

/// `f(rho) = -sum_i log tr(M_i rho)`.
#[derive(Clone, Debug)]
pub struct QstObjective {
    ensemble: MeasurementEnsemble,
}

impl QstObjective {
    pub fn new(ensemble: MeasurementEnsemble) -> Self {
        Self { ensemble }
    }

    pub fn ensemble(&self) -> &MeasurementEnsemble {
        &self.ensemble
    }
}

impl Objective for QstObjective {
    fn dim(&self) -> usize {
        self.ensemble.dim
    }

    fn value(&self, rho: &DensityState) -> f64 {
        match measurement_traces(&self.ensemble.operators, rho) {
            Some(ts) => -ts.iter().map(|t| t.ln()).sum::<f64>(),
            None => f64::INFINITY,
        }
    }

    fn gradient(&self, rho: &DensityState) -> Result<HermitianOperator> {
        let ts = measurement_traces(&self.ensemble.operators, rho)
            .ok_or_else(|| Error::Domain("tr(M_i rho) <= 0 for some i".into()))?;
        let mut g = HermitianOperator::zeros(self.dim());
        for (m, t) in self.ensemble.operators.iter().zip(ts) {
            g = &g - &m.scale(1.0 / t);
        }
        Ok(g)
    }
}

/// `f_QST(rho) - lambda log det rho`.
#[derive(Clone, Debug)]
pub struct HedgedQstObjective {
    qst: QstObjective,
    lambda: f64,
}

impl HedgedQstObjective {
    pub fn new(ensemble: MeasurementEnsemble, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidInput(format!("lambda must be positive, got {lambda}")));
        }
        Ok(Self { qst: QstObjective::new(ensemble), lambda })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// The unhedged part `f_QST`.
    pub fn unhedged(&self) -> &QstObjective {
        &self.qst
    }
}

impl Objective for HedgedQstObjective {
    fn dim(&self) -> usize {
        self.qst.dim()
    }

    fn value(&self, rho: &DensityState) -> f64 {
        if rho.min_eigenvalue() <= 0.0 {
            return f64::INFINITY;
        }
        self.qst.value(rho) - self.lambda * rho.log_det()
    }

    fn gradient(&self, rho: &DensityState) -> Result<HermitianOperator> {
        if rho.min_eigenvalue() <= 0.0 {
            return Err(Error::Domain("state is singular".into()));
        }
        let g = self.qst.gradient(rho)?;
        Ok(&g - &rho.inverse().scale(self.lambda))
    }
}

/// `f(rho) = (L/2) ||rho - B||_F^2`.
#[derive(Clone, Debug)]
pub struct QuadraticObjective {
    scale: f64,
    center: HermitianOperator,
}

impl QuadraticObjective {
    pub fn new(scale: f64, center: HermitianOperator) -> Result<Self> {
        if !(scale >= 0.0) || !scale.is_finite() {
            return Err(Error::InvalidInput(format!("scale must be nonnegative, got {scale}")));
        }
        Ok(Self { scale, center })
    }

    pub fn center(&self) -> &HermitianOperator {
        &self.center
    }
}

impl Objective for QuadraticObjective {
    fn dim(&self) -> usize {
        self.center.dim()
    }

    fn value(&self, rho: &DensityState) -> f64 {
        let r = rho.matrix() - &self.center;
        0.5 * self.scale * r.inner(&r).unwrap_or(f64::INFINITY)
    }

    fn gradient(&self, rho: &DensityState) -> Result<HermitianOperator> {
        Ok((rho.matrix() - &self.center).scale(self.scale))
    }

    fn in_domain(&self, _rho: &DensityState) -> bool {
        true
    }
}

/// Burg entropy `-sum_i log v_i`.
#[derive(Clone, Copy, Debug)]
pub struct BurgObjective {
    dim: usize,
}

impl BurgObjective {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInput("dimension must be positive".into()));
        }
        Ok(Self { dim })
    }
}

impl VectorObjective for BurgObjective {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, x: &ProbabilityVector) -> f64 {
        if !x.is_strictly_positive() {
            return f64::INFINITY;
        }
        -x.logs().iter().sum::<f64>()
    }

    fn gradient(&self, x: &ProbabilityVector) -> Result<Vec<f64>> {
        if !x.is_strictly_positive() {
            return Err(Error::Domain("Burg entropy needs strictly positive entries".into()));
        }
        Ok(x.as_slice().iter().map(|v| -1.0 / v).collect())
    }
}

/// `f(x) = -sum_i log <a_i, x>`, the diagonal specialization of QST.
#[derive(Clone, Debug)]
pub struct PoissonLinearObjective {
    rows: VectorRows,
}

impl PoissonLinearObjective {
    pub fn new(rows: VectorRows) -> Result<Self> {
        rows.validate()?;
        Ok(Self { rows })
    }

    pub fn rows(&self) -> &VectorRows {
        &self.rows
    }

    /// The same instance as a QST objective over diagonal operators.
    pub fn as_qst(&self) -> QstObjective {
        QstObjective::new(MeasurementEnsemble::diagonal(&self.rows.rows).expect("validated rows"))
    }

    fn pairings(&self, x: &ProbabilityVector) -> Option<Vec<f64>> {
        let mut out = Vec::with_capacity(self.rows.rows.len());
        for a in &self.rows.rows {
            let t: f64 = a.iter().zip(x.as_slice()).map(|(ai, xi)| ai * xi).sum();
            if !(t > 0.0) {
                return None;
            }
            out.push(t);
        }
        Some(out)
    }
}

impl VectorObjective for PoissonLinearObjective {
    fn dim(&self) -> usize {
        self.rows.dim
    }

    fn value(&self, x: &ProbabilityVector) -> f64 {
        match self.pairings(x) {
            Some(ts) => -ts.iter().map(|t| t.ln()).sum::<f64>(),
            None => f64::INFINITY,
        }
    }

    fn gradient(&self, x: &ProbabilityVector) -> Result<Vec<f64>> {
        let ts = self
            .pairings(x)
            .ok_or_else(|| Error::Domain("<a_i, x> <= 0 for some i".into()))?;
        let mut g = vec![0.0; self.rows.dim];
        for (a, t) in self.rows.rows.iter().zip(ts) {
            for (gj, aj) in g.iter_mut().zip(a) {
                *gj -= aj / t;
            }
        }
        Ok(g)
    }
}

/// Certificate that `f_QST` is not `L`-smooth relative to the negative
/// entropy: on the two-outcome instance, the `(x, x)` Hessian entry of
/// `L h - f` equals `L/x - 1/x^2`, which is negative at `x = 1/(2L)`.
/// Returns `(x, L/x - 1/x^2)`.
pub fn qst_hardness_witness(l: f64) -> Result<(f64, f64)> {
    if !(l > 0.0) || !l.is_finite() {
        return Err(Error::InvalidInput(format!("L must be positive, got {l}")));
    }
    let x = 1.0 / (2.0 * l);
    Ok((x, l / x - 1.0 / (x * x)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_density, random_ensemble, random_hermitian, random_probability, random_rows, seeded};

    const LN2: f64 = std::f64::consts::LN_2;

    /// Central difference of `f` along a traceless direction `w` at step `t`.
    fn directional_fd(f: &dyn Objective, rho: &DensityState, w: &HermitianOperator, t: f64) -> f64 {
        let plus = DensityState::from_density(&(rho.matrix() + &w.scale(t))).unwrap();
        let minus = DensityState::from_density(&(rho.matrix() - &w.scale(t))).unwrap();
        (f.value(&plus) - f.value(&minus)) / (2.0 * t)
    }

    fn check_gradient(f: &dyn Objective, seed: u64) {
        let mut rng = seeded(seed);
        for _ in 0..5 {
            let rho = random_density(&mut rng, f.dim());
            let w = random_hermitian(&mut rng, f.dim(), 1.0).traceless_part();
            let w = w.scale(0.5 * rho.min_eigenvalue() / w.schatten_norm(crate::SchattenP::Infinity).unwrap());
            let fd = directional_fd(f, &rho, &w, 1e-6);
            let an = f.gradient(&rho).unwrap().inner(&w).unwrap();
            assert!(
                (fd - an).abs() <= 1e-5 * f.value(&rho).abs().max(1.0),
                "fd {fd} vs analytic {an}"
            );
        }
    }

    fn check_midpoint_convexity(f: &dyn Objective, seed: u64) {
        let mut rng = seeded(seed);
        for _ in 0..10 {
            let a = random_density(&mut rng, f.dim());
            let b = random_density(&mut rng, f.dim());
            let m = a.mix(&b, 0.5).unwrap();
            assert!(f.value(&m) <= 0.5 * f.value(&a) + 0.5 * f.value(&b) + 1e-9);
        }
    }

    #[test]
    fn qst_coordinate_pair_values() {
        let f = QstObjective::new(MeasurementEnsemble::coordinate_pair());
        let rho = DensityState::maximally_mixed(2);
        assert!((f.value(&rho) - 2.0 * LN2).abs() < 1e-15);
        assert!((f.value(&rho) - 1.386294).abs() < 1e-6);
        let g = f.gradient(&rho).unwrap();
        assert!((&g - &HermitianOperator::scaled_identity(2, -2.0)).frobenius_norm() < 1e-14);
        assert_eq!(g.spectral_width().unwrap(), 0.0);

        let r = DensityState::from_diagonal(&[0.3, 0.7]).unwrap();
        assert!((f.value(&r) - (-(0.3f64).ln() - 0.7f64.ln())).abs() < 1e-14);
    }

    #[test]
    fn qst_out_of_domain() {
        // tr(M rho) = 0 for M = e_2 e_2^T on a state concentrated on e_1
        let f = QstObjective::new(MeasurementEnsemble::diagonal(&[vec![0.0, 1.0]]).unwrap());
        let rho = DensityState::from_exponent(&HermitianOperator::from_real_diagonal(&[0.0, -800.0])).unwrap();
        assert_eq!(f.value(&rho), f64::INFINITY);
        assert!(!f.in_domain(&rho));
        assert!(matches!(f.gradient(&rho), Err(Error::Domain(_))));
    }

    #[test]
    fn hedged_values() {
        let f = HedgedQstObjective::new(MeasurementEnsemble::coordinate_pair(), 0.1).unwrap();
        let rho = DensityState::maximally_mixed(2);
        assert!((f.value(&rho) - 2.2 * LN2).abs() < 1e-14);
        assert!((f.value(&rho) - 1.524924).abs() < 1e-6);
        let g = f.gradient(&rho).unwrap();
        assert!((&g - &HermitianOperator::scaled_identity(2, -2.2)).frobenius_norm() < 1e-13);
        assert!(HedgedQstObjective::new(MeasurementEnsemble::coordinate_pair(), 0.0).is_err());
    }

    #[test]
    fn gradients_match_finite_differences() {
        let mut rng = seeded(100);
        let ens = random_ensemble(&mut rng, 3, 5);
        check_gradient(&QstObjective::new(ens.clone()), 1);
        check_gradient(&HedgedQstObjective::new(ens, 0.05).unwrap(), 2);
        let center = random_density(&mut rng, 3).matrix().clone();
        check_gradient(&QuadraticObjective::new(2.0, center).unwrap(), 3);
    }

    #[test]
    fn objectives_are_midpoint_convex() {
        let mut rng = seeded(101);
        let ens = random_ensemble(&mut rng, 3, 4);
        check_midpoint_convexity(&QstObjective::new(ens.clone()), 4);
        check_midpoint_convexity(&HedgedQstObjective::new(ens, 0.1).unwrap(), 5);
        let center = random_density(&mut rng, 3).matrix().clone();
        check_midpoint_convexity(&QuadraticObjective::new(1.0, center).unwrap(), 6);
    }

    #[test]
    fn quadratic_minimizer() {
        let f = QuadraticObjective::new(3.0, DensityState::maximally_mixed(3).matrix().clone()).unwrap();
        let rho = DensityState::maximally_mixed(3);
        assert_eq!(f.value(&rho), 0.0);
        assert!(f.gradient(&rho).unwrap().is_zero());
    }

    #[test]
    fn burg_values() {
        for d in [1usize, 3, 7] {
            let f = BurgObjective::new(d).unwrap();
            let u = ProbabilityVector::uniform(d);
            assert!((f.value(&u) - d as f64 * (d as f64).ln()).abs() < 1e-12);
            for g in f.gradient(&u).unwrap() {
                assert!((g + d as f64).abs() < 1e-12);
            }
        }
        let f = BurgObjective::new(2).unwrap();
        let edge = ProbabilityVector::new(vec![0.0, 1.0]).unwrap();
        assert_eq!(f.value(&edge), f64::INFINITY);
        assert!(f.gradient(&edge).is_err());
        assert!(BurgObjective::new(0).is_err());
    }

    #[test]
    fn poisson_values_and_embedding() {
        let f = PoissonLinearObjective::new(VectorRows::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap()).unwrap();
        let x = ProbabilityVector::uniform(2);
        assert!((f.value(&x) - 2.0 * LN2).abs() < 1e-15);

        let mut rng = seeded(7);
        for d in [2, 4] {
            let f = PoissonLinearObjective::new(VectorRows::new(random_rows(&mut rng, d, 6)).unwrap()).unwrap();
            let q = f.as_qst();
            let x = ProbabilityVector::new(random_probability(&mut rng, d)).unwrap();
            let rho = x.to_density().unwrap();
            assert!((f.value(&x) - q.value(&rho)).abs() < 1e-12);
            let gv = f.gradient(&x).unwrap();
            let gm = q.gradient(&rho).unwrap().diagonal();
            for (a, b) in gv.iter().zip(&gm) {
                assert!((a - b).abs() < 1e-12 * a.abs().max(1.0));
            }
        }
    }

    #[test]
    fn poisson_gradient_fd() {
        let mut rng = seeded(8);
        let f = PoissonLinearObjective::new(VectorRows::new(random_rows(&mut rng, 4, 5)).unwrap()).unwrap();
        let x = ProbabilityVector::new(random_probability(&mut rng, 4)).unwrap();
        let g = f.gradient(&x).unwrap();
        // direction e_0 - e_1 keeps the sum fixed
        let h = 1e-6;
        let mut p = x.as_slice().to_vec();
        let mut m = x.as_slice().to_vec();
        p[0] += h;
        p[1] -= h;
        m[0] -= h;
        m[1] += h;
        let fd = (f.value(&ProbabilityVector::new(p).unwrap()) - f.value(&ProbabilityVector::new(m).unwrap())) / (2.0 * h);
        assert!((fd - (g[0] - g[1])).abs() < 1e-5 * f.value(&x).abs().max(1.0));
    }

    #[test]
    fn ensemble_validation_and_json() {
        assert!(MeasurementEnsemble::new(vec![]).is_err());
        assert!(MeasurementEnsemble::new(vec![HermitianOperator::zeros(2)]).is_err());
        assert!(MeasurementEnsemble::diagonal(&[vec![1.0, -0.5]]).is_err());
        assert!(MeasurementEnsemble::new(vec![HermitianOperator::identity(2), HermitianOperator::identity(3)]).is_err());

        let mut rng = seeded(9);
        let ens = random_ensemble(&mut rng, 2, 3);
        let text = ens.to_json().unwrap();
        let back = MeasurementEnsemble::from_json(&text).unwrap();
        assert_eq!(back.operators(), ens.operators());

        let bad = r#"{"dim": 3, "operators": [[[[1,0],[0,0]],[[0,0],[1,0]]]]}"#;
        assert!(MeasurementEnsemble::from_json(bad).is_err());
    }

    #[test]
    fn hardness_witness_examples() {
        let (x, v) = qst_hardness_witness(1.0).unwrap();
        assert_eq!((x, v), (0.5, -2.0));
        let (x, v) = qst_hardness_witness(10.0).unwrap();
        assert!((x - 0.05).abs() < 1e-16);
        assert!((v + 200.0).abs() < 1e-9);
        assert!(qst_hardness_witness(0.0).is_err());
    }
}
