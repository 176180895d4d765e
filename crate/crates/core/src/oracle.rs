//! Brute-force verifier: minimize the truncated closed-loop energy over an
//! FIR parameter by dense least squares.
//!
//! The parameter keeps `M` lags, masked by the pattern over the sharing
//! horizon and dense afterwards; the closed-loop impulse response is
//! truncated at lag `H`. Both truncations shrink geometrically, so the
//! returned norm upper-bounds the true optimum and tightens monotonically
//! as `M` grows. This path shares nothing with the spectral synthesis
//! beyond the dense SPD solve, which makes it a useful independent check.

use crate::error::{Error, Result};
use crate::pattern::InformationPattern;
use crate::riccati::Plant;
use crate::statespace::{markov, FirTransfer};
use crate::tol::Tolerances;
use crate::{Matrix, Vector};

/// FIR length and cost horizon for the truncated problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleConfig {
    /// Number of FIR lags retained in the parameter.
    pub fir_length: usize,
    /// Closed-loop impulse response lags 0..=H entering the cost.
    pub cost_horizon: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self { fir_length: 60, cost_horizon: 200 }
    }
}

impl OracleConfig {
    /// Enforce the floor heuristics against a concrete plant and pattern.
    pub fn validate(&self, plant: &Plant, pattern: &InformationPattern) -> Result<()> {
        if self.fir_length <= pattern.horizon() {
            return Err(Error::OracleConfig(format!(
                "FIR length {} must exceed the pattern horizon {}",
                self.fir_length,
                pattern.horizon()
            )));
        }
        let floor = self.fir_length + 10 * plant.n();
        if self.cost_horizon < floor {
            return Err(Error::OracleConfig(format!(
                "cost horizon {} below the floor M + 10 n = {}",
                self.cost_horizon, floor
            )));
        }
        Ok(())
    }
}

/// Minimizer and truncated closed-loop norm found by the oracle.
#[derive(Debug, Clone)]
pub struct OracleSolution {
    /// Truncated closed-loop H2 norm at the optimum.
    pub norm: f64,
    /// The optimal FIR parameter (lags 1..M).
    pub q_fir: FirTransfer,
}

/// Solve the FIR-truncated model matching problem by least squares.
///
/// The closed-loop Markov parameters are affine in the entries of Q:
/// CL_t = P11_t + sum_{j} sum_{i+k=t-j} P12_i Q_j P21_k. Stacking lags
/// 0..=H gives `min_v ||F v + c||` over the free entries, solved by
/// normal equations (rejected if their condition estimate exceeds 1e12).
pub fn fir_truncated_optimum(
    plant: &Plant,
    pattern: &InformationPattern,
    cfg: &OracleConfig,
) -> Result<OracleSolution> {
    cfg.validate(plant, pattern)?;
    let m_lags = cfg.fir_length;
    let horizon = cfg.cost_horizon;
    let (q1, m1, p2, q2) = (plant.q1(), plant.m1(), plant.p2(), plant.q2());

    let m11 = markov(&plant.p11(), horizon + 1);
    let m12 = markov(&plant.p12(), horizon + 1);
    let m21 = markov(&plant.p21(), horizon + 1);

    // free entries: masked over the sharing horizon, dense afterwards
    let mut variables: Vec<(usize, usize, usize)> = Vec::new();
    for lag in 1..=m_lags {
        let mask = pattern.scalar_mask(lag);
        for r in 0..p2 {
            for c in 0..q2 {
                if mask[(r, c)] != 0.0 {
                    variables.push((lag, r, c));
                }
            }
        }
    }
    let nv = variables.len();

    // S_rc(d) = sum_{i+k=d} P12_i[:, r] * P21_k[c, :]
    let mut kernels: Vec<Vec<Matrix>> = Vec::with_capacity(p2 * q2);
    for r in 0..p2 {
        for c in 0..q2 {
            let mut seq = Vec::with_capacity(horizon);
            for d in 0..horizon {
                let mut acc = Matrix::zeros(q1, m1);
                for i in 0..=d {
                    let left = m12[i].column(r);
                    let right = m21[d - i].row(c);
                    for rho in 0..q1 {
                        if left[rho] == 0.0 {
                            continue;
                        }
                        for sigma in 0..m1 {
                            acc[(rho, sigma)] += left[rho] * right[sigma];
                        }
                    }
                }
                seq.push(acc);
            }
            kernels.push(seq);
        }
    }

    let block = q1 * m1;
    let rows = (horizon + 1) * block;
    let mut f = Matrix::zeros(rows, nv);
    for (col, &(lag, r, c)) in variables.iter().enumerate() {
        let seq = &kernels[r * q2 + c];
        for t in lag..=horizon {
            let s = &seq[t - lag];
            let base = t * block;
            for rho in 0..q1 {
                for sigma in 0..m1 {
                    f[(base + rho * m1 + sigma, col)] = s[(rho, sigma)];
                }
            }
        }
    }
    let mut open_loop = Vector::zeros(rows);
    for (t, m) in m11.iter().enumerate() {
        let base = t * block;
        for rho in 0..q1 {
            for sigma in 0..m1 {
                open_loop[base + rho * m1 + sigma] = m[(rho, sigma)];
            }
        }
    }

    if nv == 0 {
        return Ok(OracleSolution {
            norm: open_loop.norm(),
            q_fir: FirTransfer::zeros(m_lags, p2, q2),
        });
    }

    let normal = f.tr_mul(&f);
    let rhs = -f.tr_mul(&open_loop);
    let eig = normal.clone().symmetric_eigen();
    let max_eig = eig.eigenvalues.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min_eig = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    let cond = if min_eig > 0.0 { max_eig / min_eig } else { f64::INFINITY };
    if cond > Tolerances::DEFAULT.normal_equation_condition {
        return Err(Error::IllConditioned { cond });
    }
    let scaled = Matrix::from_diagonal(&eig.eigenvalues.map(|l| 1.0 / l));
    let solution = &eig.eigenvectors * scaled * eig.eigenvectors.transpose() * rhs;

    let residual = f * &solution + open_loop;
    let mut coeffs = vec![Matrix::zeros(p2, q2); m_lags];
    for (&(lag, r, c), &value) in variables.iter().zip(solution.iter()) {
        coeffs[lag - 1][(r, c)] = value;
    }
    Ok(OracleSolution { norm: residual.norm(), q_fir: FirTransfer::new(coeffs)? })
}
