//! Exponentiated gradient method with Armijo line search over density
//! matrices, the spectrahedron and the probability simplex.
//!
//! The crate is organized bottom-up:
//!
//! - [`hermitian`]: dense Hermitian matrices, spectral calculus, Schatten norms.
//! - [`density`]: log-domain density states.
//! - [`entropy`]: von Neumann entropy, quantum and classical relative entropy.
//! - [`objectives`]: QST, hedged QST, Burg, log-linear and quadratic objectives.
//! - [`solver`]: the EG step, Armijo search and the solve loops.
//! - [`diagnostics`]: numerical certificates for the log-partition function
//!   of the EG step.
//! - [`sweep`]: barrier-weight sweeps for hedged tomography.
//! - [`par`]: batch execution, parallel with the `parallel` feature.
//!
//! ```
//! use expgrad::{solve, DensityState, MeasurementEnsemble, Objective, QstObjective, SolverConfig};
//!
//! let f = QstObjective::new(MeasurementEnsemble::coordinate_pair());
//! let rho0 = DensityState::from_diagonal(&[0.9, 0.1]).unwrap();
//! let res = solve(&rho0, &f, &SolverConfig::default()).unwrap();
//! assert!((res.final_value - 2.0 * std::f64::consts::LN_2).abs() < 1e-6);
//! assert!(res.final_value <= f.value(&rho0));
//! ```

// `!(x > 0.0)` style guards reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod density;
pub mod diagnostics;
pub mod entropy;
pub mod error;
pub mod hermitian;
pub mod objectives;
pub mod par;
pub mod random;
pub mod solver;
pub mod sweep;

pub use density::{DensityState, DEFAULT_EIG_FLOOR};
pub use entropy::{
    classical_relative_entropy, pinsker_gap, quantum_relative_entropy, von_neumann_entropy_neg, ProbabilityVector,
};
pub use error::{Error, Result};
pub use hermitian::{HermitianOperator, SchattenP, SpectralDecomposition, C64};
pub use objectives::{
    qst_hardness_witness, BurgObjective, HedgedQstObjective, MeasurementEnsemble, Objective, PoissonLinearObjective,
    QstObjective, QuadraticObjective, VectorObjective, VectorRows,
};
pub use par::Execution;
pub use solver::{
    armijo_search, armijo_search_simplex, eg_step, eg_step_simplex, solve, solve_observed, solve_simplex,
    solve_simplex_observed, IterationRecord, LineSearch, SolveResult, SolveStatus, SolverConfig,
};
