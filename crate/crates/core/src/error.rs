//! Error type shared by all modules.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised by validation and numerical routines.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Matrix expected to be symmetric is not, within tolerance.
    #[error("{context}: matrix not symmetric (asymmetry {asymmetry:.3e})")]
    NotSymmetric { context: &'static str, asymmetry: f64 },

    /// Matrix expected to be positive definite has a too-small eigenvalue.
    #[error("{context} not positive definite (min eigenvalue {min_eig:.3e})")]
    NotPositiveDefinite { context: &'static str, min_eig: f64 },

    /// Spectral radius at or above one where a stable matrix is required.
    #[error("{context}: spectral radius {radius:.6} >= 1, not stable")]
    Unstable { context: &'static str, radius: f64 },

    /// Iterative solver failed to converge.
    #[error("{context}: no convergence after {iterations} iterations")]
    NoConvergence { context: &'static str, iterations: usize },

    /// Riccati solution failed the closed-loop stability certificate.
    #[error("Riccati solution not stabilizing ({context}: spectral radius {radius:.6})")]
    NotStabilizing { context: &'static str, radius: f64 },

    /// Conformability failure between operands.
    #[error("dimension mismatch in {context}: {details}")]
    DimensionMismatch { context: &'static str, details: String },

    /// Evaluation point coincides with a pole.
    #[error("evaluation point within {distance:.3e} of an eigenvalue; resolvent singular")]
    SingularResolvent { distance: f64 },

    /// Nonzero feedthrough where a strictly proper system is required.
    #[error("{context}: system not strictly proper (||D|| = {norm_d:.3e})")]
    NonStrictlyProper { context: &'static str, norm_d: f64 },

    /// Quadratic form lost positive definiteness.
    #[error("singular Hessian (min eigenvalue {min_eig:.3e}, max {max_eig:.3e})")]
    SingularHessian { min_eig: f64, max_eig: f64 },

    /// Normal equations too ill-conditioned to trust.
    #[error("normal equations ill-conditioned (condition estimate {cond:.3e})")]
    IllConditioned { cond: f64 },

    /// Communication delay exceeds the sharing horizon.
    #[error("delay {delay} for block ({row},{col}) exceeds horizon N+1 = {max}")]
    DelayExceedsHorizon { delay: usize, row: usize, col: usize, max: usize },

    /// Block partitions of inputs and measurements disagree.
    #[error("mismatched partitions: {details}")]
    MismatchedPartitions { details: String },

    /// Non-finite entry in an input matrix.
    #[error("{context}: non-finite entry at ({row},{col})")]
    NonFinite { context: &'static str, row: usize, col: usize },

    /// Plant-level invariant violation, phrased for diagnostics.
    #[error("{0}")]
    PlantInvariant(String),

    /// Pattern-level invariant violation.
    #[error("{0}")]
    PatternInvariant(String),

    /// Oracle configuration violates its floor heuristics.
    #[error("oracle config invalid: {0}")]
    OracleConfig(String),
}
