//! Centralized numerical tolerances.
//!
//! Every threshold used by the solvers lives here so that tests, the CLI
//! and the library agree on what "zero" means at each stage.

/// Tolerance configuration shared by all numerical routines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Allowed relative asymmetry ||M - M'||_F / max(1, ||M||_F) for inputs
    /// declared symmetric.
    pub symmetry: f64,
    /// Eigenvalue floor for positive definiteness, relative to the largest
    /// eigenvalue.
    pub psd_floor: f64,
    /// Relative residual accepted from the Lyapunov/Sylvester solvers.
    pub lyap_residual: f64,
    /// Margin below one required of spectral radii: radius >= 1 - margin
    /// is treated as unstable.
    pub stability_margin: f64,
    /// Relative step size at which the Riccati fixed point stops.
    pub riccati_step: f64,
    /// Relative Riccati residual accepted after convergence.
    pub riccati_residual: f64,
    /// Iteration cap for the Riccati fixed point.
    pub riccati_max_iterations: usize,
    /// Absolute distance from an eigenvalue at which resolvent evaluation
    /// is refused.
    pub resolvent_distance: f64,
    /// Feedthrough norm above which a system is not strictly proper.
    pub strictly_proper: f64,
    /// Condition number cap for the oracle normal equations.
    pub normal_equation_condition: f64,
}

impl Tolerances {
    /// The default thresholds.
    pub const DEFAULT: Tolerances = Tolerances {
        symmetry: 1e-10,
        psd_floor: 1e-12,
        lyap_residual: 1e-10,
        stability_margin: 1e-9,
        riccati_step: 1e-12,
        riccati_residual: 1e-9,
        riccati_max_iterations: 100_000,
        resolvent_distance: 1e-12,
        strictly_proper: 1e-12,
        normal_equation_condition: 1e12,
    };
}

impl Default for Tolerances {
    fn default() -> Self {
        Self::DEFAULT
    }
}
