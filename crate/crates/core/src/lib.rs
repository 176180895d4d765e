//! Decentralized H2 model matching with delayed information sharing.
//!
//! This crate solves the discrete-time H2 model matching problem
//!
//! ```text
//!     min ||P11 + P12 Q P21||_H2   s.t.  Q in S ∩ (1/z)H2
//! ```
//!
//! where `S` is a delayed information sharing pattern: controller entries
//! are sparsity-constrained over the first `N` lags and unconstrained
//! afterwards (every measurement reaches every controller after `N` steps).
//!
//! The solver works directly with the original state matrices. It combines
//! the centralized control and estimation Riccati solutions into spectral
//! factors, splits the controller into a delayed centralized part plus a
//! finite impulse response correction, and computes the optimal correction
//! by a small dense quadratic program. An independent FIR least-squares
//! oracle is included for verification.
//!
//! Module map:
//! * [`numerics`] - dense matrix kernels (SPD square root, Lyapunov/Sylvester
//!   solves, spectral radius, SPD linear solve).
//! * [`statespace`] - realization arithmetic, Markov parameters, H2 norms
//!   and inner products.
//! * [`riccati`] - stabilizing solutions of the control and estimation DAREs.
//! * [`spectral`] - spectral factors, the transfer matrix `T`, centralized
//!   and delayed optimal parameters, tail projections.
//! * [`pattern`] - information sharing patterns and their projections.
//! * [`synthesis`] - the decentralized synthesis pipeline (QP assembly,
//!   solve, controller recovery, stationarity checks).
//! * [`oracle`] - brute-force FIR truncation oracle.
//! * [`fixtures`] - the two reference plants and random plant generation.

pub mod error;
pub mod fixtures;
pub mod numerics;
pub mod oracle;
pub mod pattern;
pub mod riccati;
pub mod spectral;
pub mod statespace;
pub mod synthesis;
pub mod tol;

pub use error::{Error, Result};
pub use oracle::{fir_truncated_optimum, OracleConfig, OracleSolution};
pub use pattern::{BlockPartition, InformationPattern};
pub use riccati::{control_dare, estimation_dare, ControlSolution, EstimationSolution, Plant};
pub use spectral::{build_factors, q_centralized, q_delayed, tail_project, FactorSet};
pub use statespace::{FirTransfer, StateSpace};
pub use synthesis::{
    recover_feedback, stationarity_residual, synthesize, QpProblem, SynthesisResult,
};
pub use tol::Tolerances;

/// Dense real matrix used throughout the crate.
pub type Matrix = nalgebra::DMatrix<f64>;
/// Dense real vector.
pub type Vector = nalgebra::DVector<f64>;
/// Dense complex matrix, used for unit-circle evaluation.
pub type CMatrix = nalgebra::DMatrix<num_complex::Complex<f64>>;
