//! Decentralized synthesis: assemble the FIR quadratic program, solve for
//! the sparse correction V*, recombine into the optimal parameter Q*, and
//! recover the feedback law.
//!
//! The parameter splits as Q = U + V with U supported beyond the sharing
//! horizon and V a pattern-constrained FIR. For fixed V the optimal U is a
//! delayed centralized correction, which reduces the problem to a small
//! dense QP in the free entries of V:
//!
//! ```text
//!   minimize  sum_i Tr(G_i G_i') + 2 sum_i Tr(G_i T_i'),
//!   G_i = sum_{j+k+l=i, k>=1} H_j V_k J_l,
//! ```
//!
//! where H and J are the Markov coefficients of the spectral factor
//! inverses. The optimal cost satisfies
//! `||CL(Q*)||^2 = ||CL(Q_N)||^2 + ||G||^2 + 2<G,T>`.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::numerics::solve_spd;
use crate::pattern::{FreeEntry, InformationPattern};
use crate::riccati::{control_dare, estimation_dare, ControlSolution, EstimationSolution, Plant};
use crate::spectral::{build_factors, q_centralized, q_delayed, t_coefficients};
use crate::statespace::{
    add, fir_to_ss, h2_norm, inner_product, markov, series, FirTransfer, StateSpace,
};
use crate::tol::Tolerances;
use crate::{Matrix, Vector};

/// Default seed for randomized stationarity probing.
pub const DEFAULT_SEED: u64 = 1729;

/// How many dense lags beyond the horizon a random feasible direction gets.
const DIRECTION_TAIL: usize = 5;

/// Quadratic program over the free entries of V.
#[derive(Debug, Clone)]
pub struct QpProblem {
    /// Free entries in deterministic (lag, block, row, col) order.
    pub variables: Vec<FreeEntry>,
    /// Linear map from variables to the stacked coefficients of G.
    pub map_matrix: Matrix,
    /// M' vec(T_1..T_N).
    pub linear_term: Vector,
    /// M'M.
    pub hessian: Matrix,
    horizon: usize,
    outputs: usize,
    inputs: usize,
}

impl QpProblem {
    /// Number of free variables.
    pub fn dim(&self) -> usize {
        self.variables.len()
    }

    /// Objective value v'Hv + 2 v'g at a variable vector.
    pub fn objective(&self, v: &Vector) -> f64 {
        (v.transpose() * &self.hessian * v)[(0, 0)] + 2.0 * self.linear_term.dot(v)
    }

    /// Scatter a variable vector back into an FIR transfer matrix.
    pub fn scatter(&self, v: &Vector) -> FirTransfer {
        let mut coeffs =
            vec![Matrix::zeros(self.outputs, self.inputs); self.horizon];
        for (entry, &value) in self.variables.iter().zip(v.iter()) {
            coeffs[entry.lag - 1][(entry.row, entry.col)] = value;
        }
        FirTransfer::new(coeffs).expect("scatter dimensions are consistent")
    }
}

/// Everything the solver produces for one (plant, pattern) instance.
#[derive(Debug, Clone)]
pub struct SynthesisResult {
    /// Optimal pattern-constrained FIR correction.
    pub v_star: FirTransfer,
    /// FIR image G of V* under the factor inverses.
    pub g: FirTransfer,
    /// Optimal decentralized parameter Q* = Q_N + W_L G W_R.
    pub q_star: StateSpace,
    /// Delayed centralized component U* = Q* - V*.
    pub u_star: StateSpace,
    /// Closed-loop norm with the unconstrained optimum Q_0.
    pub norm_centralized: f64,
    /// Closed-loop norm with the pure-delay optimum Q_N.
    pub norm_delayed: f64,
    /// Closed-loop norm with Q*.
    pub norm_decentralized: f64,
    /// ||G||^2 + 2<G,T>; nonpositive, and equal to the gap
    /// norm_decentralized^2 - norm_delayed^2.
    pub decomposition_value: f64,
}

/// Closed-loop realization P11 + P12 Q P21.
pub fn closed_loop(plant: &Plant, q: &StateSpace) -> Result<StateSpace> {
    if q.output_dim() != plant.p2() || q.input_dim() != plant.q2() {
        return Err(Error::DimensionMismatch {
            context: "closed_loop",
            details: format!(
                "Q is {}x{}, plant expects {}x{}",
                q.output_dim(),
                q.input_dim(),
                plant.p2(),
                plant.q2()
            ),
        });
    }
    add(&plant.p11(), &series(&series(&plant.p12(), q)?, &plant.p21())?)
}

/// H2 norm of the closed loop with parameter Q.
pub fn closed_loop_norm(plant: &Plant, q: &StateSpace) -> Result<f64> {
    h2_norm(&closed_loop(plant, q)?)
}

/// Markov coefficients H_0..H_{N-1} of W_L^-1 and J_0..J_{N-1} of W_R^-1,
/// straight from the Riccati gains:
///
/// H_0 = Omega^{1/2},  H_i = -Omega^{1/2} K A^{i-1} B2,
/// J_0 = Psi^{1/2},    J_i = -C2 A^{i-1} L Psi^{1/2}.
pub fn hj_coefficients(
    plant: &Plant,
    cs: &ControlSolution,
    es: &EstimationSolution,
    n: usize,
) -> (Vec<Matrix>, Vec<Matrix>) {
    let mut h = Vec::with_capacity(n);
    let mut j = Vec::with_capacity(n);
    h.push(cs.omega_half.clone());
    j.push(es.psi_half.clone());
    let mut a_pow = Matrix::identity(plant.n(), plant.n());
    for _ in 1..n {
        h.push(-(&cs.omega_half * &cs.k * &a_pow * plant.b2()));
        j.push(-(plant.c2() * &a_pow * &es.l * &es.psi_half));
        a_pow = &a_pow * plant.a();
    }
    h.truncate(n);
    j.truncate(n);
    (h, j)
}

/// Coefficients of G = P_X(W_L^-1 V W_R^-1) as the causal triple convolution
/// G_i = sum_{j+k+l=i, k>=1} H_j V_k J_l, i = 1..N.
pub fn g_coefficients(
    v: &FirTransfer,
    hc: &[Matrix],
    jc: &[Matrix],
) -> Result<FirTransfer> {
    let n = v.horizon();
    if hc.len() < n || jc.len() < n {
        return Err(Error::DimensionMismatch {
            context: "g_coefficients",
            details: format!("need {} H/J coefficients, got {}/{}", n, hc.len(), jc.len()),
        });
    }
    let p = hc[0].nrows();
    let q = jc[0].ncols();
    let mut coeffs = vec![Matrix::zeros(p, q); n];
    for i in 1..=n {
        for k in 1..=i {
            let vk = v.coefficient(k);
            for j in 0..=(i - k) {
                let l = i - k - j;
                coeffs[i - 1] += &hc[j] * &vk * &jc[l];
            }
        }
    }
    FirTransfer::new(coeffs)
}

fn stacked_index(lag: usize, row: usize, col: usize, p: usize, q: usize) -> usize {
    debug_assert!(lag >= 1);
    (lag - 1) * (p * q) + row * q + col
}

/// Build the QP over the pattern's free entries.
///
/// A pattern with no free entries yields a valid empty problem whose
/// solution is the zero FIR.
pub fn assemble_qp(
    pattern: &InformationPattern,
    hc: &[Matrix],
    jc: &[Matrix],
    tc: &[Matrix],
) -> Result<QpProblem> {
    let n = pattern.horizon();
    let p2 = pattern.u_blocks().total();
    let q2 = pattern.y_blocks().total();
    if hc.len() < n || jc.len() < n || tc.len() < n {
        return Err(Error::DimensionMismatch {
            context: "assemble_qp",
            details: format!(
                "need {} coefficient matrices, got H:{} J:{} T:{}",
                n,
                hc.len(),
                jc.len(),
                tc.len()
            ),
        });
    }
    let variables = pattern.free_entries();
    let nv = variables.len();
    let rows = n * p2 * q2;
    let mut map_matrix = Matrix::zeros(rows, nv);
    for (col, entry) in variables.iter().enumerate() {
        let (k, r, c) = (entry.lag, entry.row, entry.col);
        for i in k..=n {
            // G_i gains sum_{j+l=i-k} H_j e_rc J_l from this unit entry
            for j in 0..=(i - k) {
                let l = i - k - j;
                let hj = &hc[j];
                let jl = &jc[l];
                for rho in 0..p2 {
                    let h_val = hj[(rho, r)];
                    if h_val == 0.0 {
                        continue;
                    }
                    for sigma in 0..q2 {
                        map_matrix[(stacked_index(i, rho, sigma, p2, q2), col)] +=
                            h_val * jl[(c, sigma)];
                    }
                }
            }
        }
    }
    let mut t_vec = Vector::zeros(rows);
    for (i, t) in tc.iter().take(n).enumerate() {
        for r in 0..p2 {
            for c in 0..q2 {
                t_vec[stacked_index(i + 1, r, c, p2, q2)] = t[(r, c)];
            }
        }
    }
    let hessian = map_matrix.tr_mul(&map_matrix);
    let linear_term = map_matrix.tr_mul(&t_vec);
    Ok(QpProblem {
        variables,
        map_matrix,
        linear_term,
        hessian,
        horizon: n,
        outputs: p2,
        inputs: q2,
    })
}

/// Minimize the QP: v* = -(M'M)^-1 M't, scattered back into the pattern.
pub fn solve_v(qp: &QpProblem) -> Result<FirTransfer> {
    if qp.dim() == 0 {
        return Ok(FirTransfer::zeros(qp.horizon, qp.outputs, qp.inputs));
    }
    let v = solve_spd(&qp.hessian, &(-&qp.linear_term))?;
    Ok(qp.scatter(&v))
}

fn validate_pattern(plant: &Plant, pattern: &InformationPattern) -> Result<()> {
    if pattern.u_blocks().total() != plant.p2() || pattern.y_blocks().total() != plant.q2() {
        return Err(Error::PatternInvariant(format!(
            "pattern covers {}x{} channels but the plant has p2 = {}, q2 = {}",
            pattern.u_blocks().total(),
            pattern.y_blocks().total(),
            plant.p2(),
            plant.q2()
        )));
    }
    Ok(())
}

/// Full decentralized synthesis for one plant and pattern.
pub fn synthesize(plant: &Plant, pattern: &InformationPattern) -> Result<SynthesisResult> {
    validate_pattern(plant, pattern)?;
    let n = pattern.horizon();
    let cs = control_dare(plant)?;
    let es = estimation_dare(plant)?;
    let fs = build_factors(plant, &cs, &es)?;

    let q0 = q_centralized(&fs)?;
    let norm_centralized = closed_loop_norm(plant, &q0)?;
    let q_n = q_delayed(&fs, n)?;
    let norm_delayed = closed_loop_norm(plant, &q_n)?;

    let (hc, jc) = hj_coefficients(plant, &cs, &es, n);
    let tc = t_coefficients(&fs, n);
    let qp = assemble_qp(pattern, &hc, &jc, &tc)?;

    if qp.dim() == 0 {
        // pure delay: V = 0 and the delayed solution is already optimal
        let v_star = FirTransfer::zeros(n, plant.p2(), plant.q2());
        let g = FirTransfer::zeros(n, plant.p2(), plant.q2());
        return Ok(SynthesisResult {
            v_star,
            g,
            u_star: q_n.clone(),
            q_star: q_n,
            norm_centralized,
            norm_delayed,
            norm_decentralized: norm_delayed,
            decomposition_value: 0.0,
        });
    }

    let v_star = solve_v(&qp)?;
    let g = g_coefficients(&v_star, &hc, &jc)?;
    let correction = series(&series(&fs.w_l, &fir_to_ss(&g))?, &fs.w_r)?;
    let q_star = add(&q_n, &correction)?;
    let u_star = add(&q_star, &fir_to_ss(&v_star).neg())?;
    let norm_decentralized = closed_loop_norm(plant, &q_star)?;
    let t_fir = FirTransfer::new(tc)?;
    let decomposition_value = g.norm_sq() + 2.0 * g.inner(&t_fir);

    Ok(SynthesisResult {
        v_star,
        g,
        q_star,
        u_star,
        norm_centralized,
        norm_delayed,
        norm_decentralized,
        decomposition_value,
    })
}

/// Draw a random unit-norm FIR direction inside the constraint set:
/// pattern-masked lags 1..N plus `tail` dense lags.
fn feasible_direction(
    pattern: &InformationPattern,
    tail: usize,
    rng: &mut ChaCha8Rng,
) -> Option<FirTransfer> {
    let n = pattern.horizon();
    let p2 = pattern.u_blocks().total();
    let q2 = pattern.y_blocks().total();
    let mut coeffs = Vec::with_capacity(n + tail);
    for lag in 1..=n {
        let mask = pattern.scalar_mask(lag);
        let raw = Matrix::from_fn(p2, q2, |_, _| rng.random_range(-1.0..1.0));
        coeffs.push(raw.component_mul(&mask));
    }
    for _ in 0..tail {
        coeffs.push(Matrix::from_fn(p2, q2, |_, _| rng.random_range(-1.0..1.0)));
    }
    let f = FirTransfer::new(coeffs).ok()?;
    let norm = f.norm_sq().sqrt();
    if norm == 0.0 {
        return None;
    }
    Some(f.scale(1.0 / norm))
}

/// Largest absolute first-order directional derivative of the closed-loop
/// cost at Q over random unit feasible directions.
///
/// The derivative along a direction d is 2 <P11 + P12 Q P21, P12 d P21>;
/// it vanishes at an optimum over the constraint subspace.
pub fn stationarity_residual(
    plant: &Plant,
    q: &StateSpace,
    pattern: &InformationPattern,
    trials: usize,
    seed: u64,
) -> Result<f64> {
    stationarity_residual_with_tail(plant, q, pattern, trials, seed, DIRECTION_TAIL)
}

/// [`stationarity_residual`] with an explicit number of dense lags above
/// the horizon (zero restricts directions to the masked lags only).
pub fn stationarity_residual_with_tail(
    plant: &Plant,
    q: &StateSpace,
    pattern: &InformationPattern,
    trials: usize,
    seed: u64,
    tail: usize,
) -> Result<f64> {
    validate_pattern(plant, pattern)?;
    let cl = closed_loop(plant, q)?;
    let p12 = plant.p12();
    let p21 = plant.p21();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let Some(direction) = feasible_direction(pattern, tail, &mut rng) else {
            continue;
        };
        let probe = series(&series(&p12, &fir_to_ss(&direction))?, &p21)?;
        let derivative = 2.0 * inner_product(&cl, &probe)?;
        worst = worst.max(derivative.abs());
    }
    Ok(worst)
}

/// Recover the feedback law K = Q (I + P22 Q)^-1 from the parameter.
///
/// Q must be strictly proper so the feedthrough of I + P22 Q is the
/// identity. The returned realization need not be stable on its own; it
/// internally stabilizes the plant whenever Q is stable.
pub fn recover_feedback(q: &StateSpace, plant: &Plant) -> Result<StateSpace> {
    let d_norm = q.d().norm();
    if d_norm > Tolerances::DEFAULT.strictly_proper {
        return Err(Error::NonStrictlyProper { context: "recover_feedback", norm_d: d_norm });
    }
    let loop_gain = series(&plant.p22(), q)?;
    let m = StateSpace::new(
        loop_gain.a().clone(),
        loop_gain.b().clone(),
        loop_gain.c().clone(),
        loop_gain.d() + Matrix::identity(plant.q2(), plant.q2()),
    )?;
    series(q, &m.inverse()?)
}

/// Block communication delays of the inner loop: entry (b, a) is the first
/// lag at which measurement block b responds to input block a, capped at
/// the pattern horizon plus one (P22 is strictly proper, so delays are at
/// least 1). Feeds the quadratic invariance test.
pub fn plant_block_delays(plant: &Plant, pattern: &InformationPattern) -> Vec<Vec<usize>> {
    let n = pattern.horizon();
    let mk = markov(&plant.p22(), n + 2);
    let u_sizes = pattern.u_blocks().sizes();
    let y_sizes = pattern.y_blocks().sizes();
    let u_off = pattern.u_blocks().offsets();
    let y_off = pattern.y_blocks().offsets();
    (0..y_sizes.len())
        .map(|b| {
            (0..u_sizes.len())
                .map(|a| {
                    (1..=n + 1)
                        .find(|&lag| {
                            let block = mk[lag]
                                .view((y_off[b], u_off[a]), (y_sizes[b], u_sizes[a]))
                                .norm();
                            block > 1e-12
                        })
                        .unwrap_or(n + 1)
                })
                .collect()
        })
        .collect()
}

/// Closed-loop interconnection of the plant with a strictly proper feedback
/// law K: the realization of P11 + P12 K (I - P22 K)^-1 P21 built from the
/// feedback loop itself.
pub fn closed_loop_with_feedback(plant: &Plant, k: &StateSpace) -> Result<StateSpace> {
    let d_norm = k.d().norm();
    if d_norm > Tolerances::DEFAULT.strictly_proper {
        return Err(Error::NonStrictlyProper {
            context: "closed_loop_with_feedback",
            norm_d: d_norm,
        });
    }
    if k.output_dim() != plant.p2() || k.input_dim() != plant.q2() {
        return Err(Error::DimensionMismatch {
            context: "closed_loop_with_feedback",
            details: format!(
                "K is {}x{}, plant expects {}x{}",
                k.output_dim(),
                k.input_dim(),
                plant.p2(),
                plant.q2()
            ),
        });
    }
    let n = plant.n();
    let nk = k.state_dim();
    let mut a = Matrix::zeros(n + nk, n + nk);
    a.view_mut((0, 0), (n, n)).copy_from(plant.a());
    a.view_mut((0, n), (n, nk)).copy_from(&(plant.b2() * k.c()));
    a.view_mut((n, 0), (nk, n)).copy_from(&(k.b() * plant.c2()));
    a.view_mut((n, n), (nk, nk)).copy_from(k.a());
    let mut b = Matrix::zeros(n + nk, plant.m1());
    b.view_mut((0, 0), (n, plant.m1())).copy_from(plant.b1());
    b.view_mut((n, 0), (nk, plant.m1())).copy_from(&(k.b() * plant.d21()));
    let mut c = Matrix::zeros(plant.q1(), n + nk);
    c.view_mut((0, 0), (plant.q1(), n)).copy_from(plant.c1());
    c.view_mut((0, n), (plant.q1(), nk)).copy_from(&(plant.d12() * k.c()));
    StateSpace::new(a, b, c, Matrix::zeros(plant.q1(), plant.m1()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::pattern::{project_fir, pure_delay_pattern, uniform_pattern, BlockPartition};
    use crate::spectral::FactorSet;
    use crate::statespace::markov;

    fn chain_setup() -> (Plant, ControlSolution, EstimationSolution, FactorSet) {
        let plant = fixtures::chain_plant();
        let cs = control_dare(&plant).unwrap();
        let es = estimation_dare(&plant).unwrap();
        let fs = build_factors(&plant, &cs, &es).unwrap();
        (plant, cs, es, fs)
    }

    #[test]
    fn hj_match_factor_inverse_markov() {
        let (plant, cs, es, fs) = chain_setup();
        let (hc, jc) = hj_coefficients(&plant, &cs, &es, 6);
        let mh = markov(&fs.w_l_inv, 6);
        let mj = markov(&fs.w_r_inv, 6);
        for i in 0..6 {
            assert!((&hc[i] - &mh[i]).norm() <= 1e-10);
            assert!((&jc[i] - &mj[i]).norm() <= 1e-10);
        }
    }

    #[test]
    fn hj_static_when_gains_vanish() {
        let plant = Plant::new(
            Matrix::zeros(1, 1),
            Matrix::from_row_slice(1, 2, &[1.0, 0.0]),
            Matrix::from_element(1, 1, 1.0),
            Matrix::from_column_slice(2, 1, &[1.0, 0.0]),
            Matrix::from_element(1, 1, 1.0),
            Matrix::from_column_slice(2, 1, &[0.0, 1.0]),
            Matrix::from_row_slice(1, 2, &[0.0, 1.0]),
        )
        .unwrap();
        let cs = control_dare(&plant).unwrap();
        let es = estimation_dare(&plant).unwrap();
        let (hc, jc) = hj_coefficients(&plant, &cs, &es, 4);
        assert!((&hc[0] - &cs.omega_half).norm() < 1e-12);
        assert!((&jc[0] - &es.psi_half).norm() < 1e-12);
        for i in 1..4 {
            assert!(hc[i].norm() < 1e-12);
            assert!(jc[i].norm() < 1e-12);
        }
    }

    #[test]
    fn hj_truncate_for_nilpotent_state_matrix() {
        let plant = Plant::new(
            Matrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]),
            Matrix::from_row_slice(2, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0]),
            Matrix::from_row_slice(2, 1, &[0.0, 1.0]),
            Matrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0]),
            Matrix::from_row_slice(1, 2, &[1.0, 0.0]),
            Matrix::from_row_slice(2, 1, &[0.0, 1.0]),
            Matrix::from_row_slice(1, 3, &[0.0, 0.0, 1.0]),
        )
        .unwrap();
        let cs = control_dare(&plant).unwrap();
        let es = estimation_dare(&plant).unwrap();
        let (hc, _) = hj_coefficients(&plant, &cs, &es, 6);
        // H_i = -Omega^{1/2} K A^{i-1} B2 vanishes once A^{i-1} = 0
        for h in hc.iter().skip(3) {
            assert!(h.norm() < 1e-12);
        }
    }

    #[test]
    fn g_coefficients_scalar_fixture() {
        let hc = vec![Matrix::from_element(1, 1, 2.0), Matrix::from_element(1, 1, 1.0)];
        let jc = vec![Matrix::from_element(1, 1, 3.0), Matrix::from_element(1, 1, -1.0)];
        let v = FirTransfer::new(vec![
            Matrix::from_element(1, 1, 1.0),
            Matrix::from_element(1, 1, 1.0),
        ])
        .unwrap();
        let g = g_coefficients(&v, &hc, &jc).unwrap();
        // G1 = H0 V1 J0 = 6 v1; G2 = H0 V2 J0 + (H0 J1 + H1 J0) v1 = 6 v2 + v1
        assert!((g.coefficient(1)[(0, 0)] - 6.0).abs() < 1e-14);
        assert!((g.coefficient(2)[(0, 0)] - 7.0).abs() < 1e-14);
    }

    #[test]
    fn g_of_zero_is_zero() {
        let (plant, cs, es, _) = chain_setup();
        let (hc, jc) = hj_coefficients(&plant, &cs, &es, 3);
        let g = g_coefficients(&FirTransfer::zeros(3, 3, 3), &hc, &jc).unwrap();
        assert_eq!(g.norm_sq(), 0.0);
    }

    #[test]
    fn g_with_static_factors_is_congruence() {
        let plant = Plant::new(
            Matrix::zeros(1, 1),
            Matrix::from_row_slice(1, 2, &[1.0, 0.0]),
            Matrix::from_element(1, 1, 1.0),
            Matrix::from_column_slice(2, 1, &[1.0, 0.0]),
            Matrix::from_element(1, 1, 1.0),
            Matrix::from_column_slice(2, 1, &[0.0, 1.0]),
            Matrix::from_row_slice(1, 2, &[0.0, 1.0]),
        )
        .unwrap();
        let cs = control_dare(&plant).unwrap();
        let es = estimation_dare(&plant).unwrap();
        let (hc, jc) = hj_coefficients(&plant, &cs, &es, 2);
        let v = FirTransfer::new(vec![
            Matrix::from_element(1, 1, 0.7),
            Matrix::from_element(1, 1, -0.4),
        ])
        .unwrap();
        let g = g_coefficients(&v, &hc, &jc).unwrap();
        for lag in 1..=2 {
            let expected = &cs.omega_half * v.coefficient(lag) * &es.psi_half;
            assert!((g.coefficient(lag) - expected).norm() < 1e-14);
        }
    }

    #[test]
    fn qp_on_chain_is_positive_definite_and_stationary() {
        let (plant, cs, es, fs) = chain_setup();
        let pattern = fixtures::chain_information_pattern();
        let (hc, jc) = hj_coefficients(&plant, &cs, &es, 2);
        let tc = t_coefficients(&fs, 2);
        let qp = assemble_qp(&pattern, &hc, &jc, &tc).unwrap();
        assert_eq!(qp.dim(), 10);
        let eig = qp.hessian.clone().symmetric_eigen();
        let min_eig = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(min_eig > 0.0);
        // first-order optimality of the solve
        let v = solve_spd(&qp.hessian, &(-&qp.linear_term)).unwrap();
        assert!((&qp.hessian * &v + &qp.linear_term).norm() <= 1e-9);
    }

    #[test]
    fn empty_pattern_gives_empty_qp_and_zero_v() {
        let (plant, cs, es, fs) = chain_setup();
        let pattern = pure_delay_pattern(
            BlockPartition::new(vec![1, 1, 1]).unwrap(),
            BlockPartition::new(vec![1, 1, 1]).unwrap(),
            2,
        )
        .unwrap();
        let (hc, jc) = hj_coefficients(&plant, &cs, &es, 2);
        let tc = t_coefficients(&fs, 2);
        let qp = assemble_qp(&pattern, &hc, &jc, &tc).unwrap();
        assert_eq!(qp.dim(), 0);
        let v = solve_v(&qp).unwrap();
        assert_eq!(v.norm_sq(), 0.0);
    }

    #[test]
    fn zero_coupling_gives_zero_v() {
        let (plant, cs, es, _) = chain_setup();
        let pattern = fixtures::chain_information_pattern();
        let (hc, jc) = hj_coefficients(&plant, &cs, &es, 2);
        let tc = vec![Matrix::zeros(3, 3), Matrix::zeros(3, 3)];
        let qp = assemble_qp(&pattern, &hc, &jc, &tc).unwrap();
        let v = solve_v(&qp).unwrap();
        assert!(v.norm_sq() < 1e-24);
    }

    #[test]
    fn chain_qp_objective_matches_norm_gap() {
        let (plant, cs, es, fs) = chain_setup();
        let pattern = fixtures::chain_information_pattern();
        let (hc, jc) = hj_coefficients(&plant, &cs, &es, 2);
        let tc = t_coefficients(&fs, 2);
        let qp = assemble_qp(&pattern, &hc, &jc, &tc).unwrap();
        let v = solve_spd(&qp.hessian, &(-&qp.linear_term)).unwrap();
        let objective = qp.objective(&v);
        let expected = 2.1082_f64.powi(2) - 2.1780_f64.powi(2);
        assert!((objective - expected).abs() <= 2e-3, "objective = {objective}");
    }

    #[test]
    fn synthesize_chain_reproduces_reference_norms() {
        let plant = fixtures::chain_plant();
        let pattern = fixtures::chain_information_pattern();
        let result = synthesize(&plant, &pattern).unwrap();
        assert!((result.norm_centralized - 2.0853).abs() <= 1e-3);
        assert!((result.norm_delayed - 2.1780).abs() <= 1e-3);
        assert!((result.norm_decentralized - 2.1082).abs() <= 1e-3);
    }

    #[test]
    fn synthesize_invariants_on_chain() {
        let plant = fixtures::chain_plant();
        let pattern = fixtures::chain_information_pattern();
        let result = synthesize(&plant, &pattern).unwrap();

        // sandwich ordering
        assert!(result.norm_centralized <= result.norm_decentralized + 1e-9);
        assert!(result.norm_decentralized <= result.norm_delayed + 1e-9);

        // cost decomposition
        let gap = result.norm_decentralized.powi(2)
            - result.norm_delayed.powi(2)
            - result.decomposition_value;
        assert!(gap.abs() <= 1e-8);
        assert!(result.decomposition_value <= 0.0);

        // V* stays inside the pattern
        let projected = project_fir(&result.v_star, &pattern).unwrap();
        assert_eq!(projected, result.v_star);

        // Q* coefficients over the horizon equal V*, and vanish off-pattern
        let mk = markov(&result.q_star, 3);
        for lag in 1..=2 {
            assert!((&mk[lag] - result.v_star.coefficient(lag)).norm() <= 1e-9);
            let complement = Matrix::from_element(3, 3, 1.0) - pattern.scalar_mask(lag);
            assert!(mk[lag].component_mul(&complement).norm() <= 1e-9);
        }

        // U* lives beyond the horizon
        let mu = markov(&result.u_star, 3);
        for m in mu.iter().take(3) {
            assert!(m.norm() <= 1e-9);
        }
    }

    #[test]
    fn g_consistency_with_factor_inverses() {
        let plant = fixtures::chain_plant();
        let pattern = fixtures::chain_information_pattern();
        let result = synthesize(&plant, &pattern).unwrap();
        let cs = control_dare(&plant).unwrap();
        let es = estimation_dare(&plant).unwrap();
        let fs = build_factors(&plant, &cs, &es).unwrap();
        let image = series(
            &series(&fs.w_l_inv, &fir_to_ss(&result.v_star)).unwrap(),
            &fs.w_r_inv,
        )
        .unwrap();
        let mk = markov(&image, 3);
        for lag in 1..=2 {
            assert!((&mk[lag] - result.g.coefficient(lag)).norm() <= 1e-10);
        }
    }

    #[test]
    fn pure_delay_synthesis_equals_delayed_solution() {
        let plant = fixtures::chain_plant();
        let pattern = pure_delay_pattern(
            BlockPartition::new(vec![1, 1, 1]).unwrap(),
            BlockPartition::new(vec![1, 1, 1]).unwrap(),
            2,
        )
        .unwrap();
        let result = synthesize(&plant, &pattern).unwrap();
        assert_eq!(result.norm_decentralized, result.norm_delayed);
        assert_eq!(result.decomposition_value, 0.0);
        assert_eq!(result.v_star.norm_sq(), 0.0);
    }

    #[test]
    fn full_mask_recovers_centralized_cost() {
        let plant = fixtures::chain_plant();
        let full = uniform_pattern(
            BlockPartition::new(vec![1, 1, 1]).unwrap(),
            BlockPartition::new(vec![1, 1, 1]).unwrap(),
            2,
            vec![vec![true; 3]; 3],
        )
        .unwrap();
        let result = synthesize(&plant, &full).unwrap();
        assert!(
            (result.norm_decentralized - result.norm_centralized).abs() <= 1e-8,
            "full-mask norm {} vs centralized {}",
            result.norm_decentralized,
            result.norm_centralized
        );
    }

    #[test]
    fn stationarity_at_optima() {
        let plant = fixtures::chain_plant();
        let pattern = fixtures::chain_information_pattern();
        let result = synthesize(&plant, &pattern).unwrap();
        let residual =
            stationarity_residual(&plant, &result.q_star, &pattern, 30, DEFAULT_SEED).unwrap();
        assert!(residual <= 1e-7, "residual at Q* = {residual:.3e}");

        // unconstrained directions at the centralized optimum
        let cs = control_dare(&plant).unwrap();
        let es = estimation_dare(&plant).unwrap();
        let fs = build_factors(&plant, &cs, &es).unwrap();
        let q0 = q_centralized(&fs).unwrap();
        let full = uniform_pattern(
            BlockPartition::new(vec![1, 1, 1]).unwrap(),
            BlockPartition::new(vec![1, 1, 1]).unwrap(),
            2,
            vec![vec![true; 3]; 3],
        )
        .unwrap();
        let residual = stationarity_residual(&plant, &q0, &full, 30, DEFAULT_SEED).unwrap();
        assert!(residual <= 1e-7, "residual at Q0 = {residual:.3e}");
    }

    #[test]
    fn delayed_solution_is_suboptimal_inside_pattern() {
        let plant = fixtures::chain_plant();
        let pattern = fixtures::chain_information_pattern();
        let cs = control_dare(&plant).unwrap();
        let es = estimation_dare(&plant).unwrap();
        let fs = build_factors(&plant, &cs, &es).unwrap();
        let q_n = q_delayed(&fs, 2).unwrap();
        let residual =
            stationarity_residual_with_tail(&plant, &q_n, &pattern, 30, DEFAULT_SEED, 0).unwrap();
        assert!(residual > 1e-3, "Q_N looked stationary: {residual:.3e}");
    }

    #[test]
    fn feedback_of_zero_parameter_is_zero() {
        let plant = fixtures::chain_plant();
        let q = StateSpace::zero(3, 3);
        let k = recover_feedback(&q, &plant).unwrap();
        for m in markov(&k, 10) {
            assert!(m.norm() < 1e-14);
        }
    }

    #[test]
    fn feedback_equals_parameter_without_inner_loop() {
        // B2 = 0 disconnects P22, so K = Q
        let plant = Plant::new(
            Matrix::from_element(1, 1, 0.5),
            Matrix::from_row_slice(1, 2, &[1.0, 0.0]),
            Matrix::zeros(1, 1),
            Matrix::from_column_slice(2, 1, &[1.0, 0.0]),
            Matrix::from_element(1, 1, 1.0),
            Matrix::from_column_slice(2, 1, &[0.0, 1.0]),
            Matrix::from_row_slice(1, 2, &[0.0, 1.0]),
        )
        .unwrap();
        let q = fir_to_ss(
            &FirTransfer::new(vec![
                Matrix::from_element(1, 1, 0.3),
                Matrix::from_element(1, 1, -0.2),
            ])
            .unwrap(),
        );
        let k = recover_feedback(&q, &plant).unwrap();
        let mq = markov(&q, 10);
        let mk = markov(&k, 10);
        for (a, b) in mq.iter().zip(mk.iter()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn feedback_closed_loop_matches_parameter_form() {
        let plant = fixtures::chain_plant();
        let pattern = fixtures::chain_information_pattern();
        let result = synthesize(&plant, &pattern).unwrap();
        let k = recover_feedback(&result.q_star, &plant).unwrap();
        let cl = closed_loop_with_feedback(&plant, &k).unwrap();
        let norm_via_k = h2_norm(&cl).unwrap();
        assert!(
            (norm_via_k - result.norm_decentralized).abs() <= 1e-8,
            "norm via K {} vs via Q {}",
            norm_via_k,
            result.norm_decentralized
        );
        // the chain pattern is quadratically invariant here, so the feedback
        // law inherits the sparsity over the horizon
        let mk = markov(&k, 3);
        for lag in 1..=2 {
            let complement = Matrix::from_element(3, 3, 1.0) - pattern.scalar_mask(lag);
            assert!(mk[lag].component_mul(&complement).norm() <= 1e-8);
        }
    }

    #[test]
    fn sandwich_ordering_on_random_plants() {
        let mut rng = fixtures::seeded_rng(808);
        for i in 0..20 {
            let dims = fixtures::RandomPlantDims { n: 2 + i % 3, m1: 3, p2: 2, q1: 3, q2: 2 };
            let plant = fixtures::random_stable_plant(&mut rng, dims);
            let mask = match i % 3 {
                0 => vec![vec![true, false], vec![true, true]],
                1 => vec![vec![true, false], vec![false, true]],
                _ => vec![vec![false, false], vec![false, true]],
            };
            let pattern = uniform_pattern(
                BlockPartition::new(vec![1, 1]).unwrap(),
                BlockPartition::new(vec![1, 1]).unwrap(),
                1 + i % 3,
                mask,
            )
            .unwrap();
            let r = synthesize(&plant, &pattern).unwrap();
            assert!(r.norm_centralized <= r.norm_decentralized + 1e-9, "plant {i}");
            assert!(r.norm_decentralized <= r.norm_delayed + 1e-9, "plant {i}");
        }
    }

    #[test]
    fn chain_block_delays_follow_the_coupling_graph() {
        let plant = fixtures::chain_plant();
        let pattern = fixtures::chain_information_pattern();
        let delays = plant_block_delays(&plant, &pattern);
        assert_eq!(delays, vec![vec![1, 2, 3], vec![2, 1, 2], vec![3, 2, 1]]);
        assert!(crate::pattern::is_quadratically_invariant(&pattern, &delays));
    }

    #[test]
    fn rejects_pattern_with_wrong_dimensions() {
        let plant = fixtures::chain_plant();
        let pattern = pure_delay_pattern(
            BlockPartition::new(vec![1, 1]).unwrap(),
            BlockPartition::new(vec![1, 1]).unwrap(),
            2,
        )
        .unwrap();
        assert!(synthesize(&plant, &pattern).is_err());
    }
}
