//! Spectral factors of the plant's outer blocks, the coupling transfer
//! matrix T, and the centralized (delayed and undelayed) optimal model
//! matching parameters.
//!
//! The left factor satisfies P12~ P12 = W_L^-~ W_L^-1 and the right factor
//! P21 P21~ = W_R^-1 W_R^-~; both are causal with causal inverses, built
//! from the Riccati gains. T is realized directly from the gains, never via
//! anticausal algebra.

use crate::error::{Error, Result};
use crate::riccati::{ControlSolution, EstimationSolution, Plant};
use crate::statespace::{delay, series, StateSpace};
use crate::tol::Tolerances;
use crate::Matrix;

/// The five realizations driving every solution formula.
#[derive(Debug, Clone)]
pub struct FactorSet {
    /// Left spectral factor, p2 x p2.
    pub w_l: StateSpace,
    /// Causal inverse of the left factor.
    pub w_l_inv: StateSpace,
    /// Right spectral factor, q2 x q2.
    pub w_r: StateSpace,
    /// Causal inverse of the right factor.
    pub w_r_inv: StateSpace,
    /// Strictly proper coupling term T, p2 x q2.
    pub t: StateSpace,
}

/// Assemble the spectral factors and T from the Riccati solutions.
///
/// ```text
/// W_L     = [A+B2K | B2; K | I] Omega^{-1/2}
/// W_L^-1  = Omega^{1/2} [A | -B2; K | I]
/// W_R     = Psi^{-1/2} [A+LC2 | L; C2 | I]
/// W_R^-1  = [A | L; -C2 | I] Psi^{1/2}
/// T       = Omega^{1/2} [A | L; K | 0] Psi^{1/2}
/// ```
pub fn build_factors(
    plant: &Plant,
    cs: &ControlSolution,
    es: &EstimationSolution,
) -> Result<FactorSet> {
    let a = plant.a();
    let w_l = StateSpace::new(
        a + plant.b2() * &cs.k,
        plant.b2() * &cs.omega_half_inv,
        cs.k.clone(),
        cs.omega_half_inv.clone(),
    )?;
    let w_l_inv = StateSpace::new(
        a.clone(),
        -plant.b2(),
        &cs.omega_half * &cs.k,
        cs.omega_half.clone(),
    )?;
    let w_r = StateSpace::new(
        a + &es.l * plant.c2(),
        es.l.clone(),
        &es.psi_half_inv * plant.c2(),
        es.psi_half_inv.clone(),
    )?;
    let w_r_inv = StateSpace::new(
        a.clone(),
        &es.l * &es.psi_half,
        -plant.c2(),
        es.psi_half.clone(),
    )?;
    let t = StateSpace::new(
        a.clone(),
        &es.l * &es.psi_half,
        &cs.omega_half * &cs.k,
        Matrix::zeros(plant.p2(), plant.q2()),
    )?;
    let margin = 1.0 - Tolerances::DEFAULT.stability_margin;
    for (sys, context) in [
        (&w_l, "W_L"),
        (&w_l_inv, "W_L^-1"),
        (&w_r, "W_R"),
        (&w_r_inv, "W_R^-1"),
        (&t, "T"),
    ] {
        let radius = sys.radius();
        if radius >= margin {
            return Err(Error::Unstable { context, radius });
        }
    }
    Ok(FactorSet { w_l, w_l_inv, w_r, w_r_inv, t })
}

/// Optimal unconstrained parameter Q_0 = -W_L T W_R.
pub fn q_centralized(fs: &FactorSet) -> Result<StateSpace> {
    Ok(series(&series(&fs.w_l, &fs.t)?, &fs.w_r)?.neg())
}

/// Projection of a strictly proper stable F onto lags above N:
/// sum_{i > N} z^-i C A^{i-1} B.
///
/// Realized exactly as z^-N applied to (A, A^N B, C, 0), so the infinite
/// tail is preserved; the first N Markov parameters of the result vanish.
pub fn tail_project(f: &StateSpace, n: usize) -> Result<StateSpace> {
    let tol = Tolerances::DEFAULT;
    let d_norm = f.d().norm();
    if d_norm > tol.strictly_proper {
        return Err(Error::NonStrictlyProper { context: "tail_project", norm_d: d_norm });
    }
    let radius = f.radius();
    if radius >= 1.0 - tol.stability_margin {
        return Err(Error::Unstable { context: "tail_project", radius });
    }
    if n == 0 {
        return Ok(f.clone());
    }
    let mut a_pow = Matrix::identity(f.state_dim(), f.state_dim());
    for _ in 0..n {
        a_pow = &a_pow * f.a();
    }
    let advanced = StateSpace::new(
        f.a().clone(),
        &a_pow * f.b(),
        f.c().clone(),
        Matrix::zeros(f.output_dim(), f.input_dim()),
    )?;
    Ok(delay(&advanced, n))
}

/// Optimal delayed centralized parameter Q_N = -W_L P_{lags > N}(T) W_R.
///
/// With N = 0 the projection is the identity on the strictly proper T and
/// the result coincides with [`q_centralized`].
pub fn q_delayed(fs: &FactorSet, n: usize) -> Result<StateSpace> {
    let tail = tail_project(&fs.t, n)?;
    Ok(series(&series(&fs.w_l, &tail)?, &fs.w_r)?.neg())
}

/// Leading coefficients T_1..T_N of the coupling term.
pub fn t_coefficients(fs: &FactorSet, n: usize) -> Vec<Matrix> {
    let mut mk = crate::statespace::markov(&fs.t, n + 1);
    mk.remove(0);
    mk
}
