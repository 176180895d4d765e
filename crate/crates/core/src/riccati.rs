//! Stabilizing solutions of the control and estimation discrete algebraic
//! Riccati equations with cross terms.
//!
//! Both equations are solved by fixed-point iteration from zero, which
//! converges monotonically for stable plants; the closed-loop spectral
//! radius is certified explicitly after convergence.

use crate::error::{Error, Result};
use crate::numerics::{check_finite, spectral_radius, sqrtm_spd};
use crate::statespace::StateSpace;
use crate::tol::Tolerances;
use crate::Matrix;

/// Four-block generalized plant
///
/// ```text
///     [ A  | B1   B2  ]
/// P = [ C1 | 0    D12 ]
///     [ C2 | D21  0   ]
/// ```
///
/// Validated on construction: A stable, D12'D12 and D21 D21' positive
/// definite, all blocks conformable and finite.
#[derive(Debug, Clone, PartialEq)]
pub struct Plant {
    a: Matrix,
    b1: Matrix,
    b2: Matrix,
    c1: Matrix,
    c2: Matrix,
    d12: Matrix,
    d21: Matrix,
}

impl Plant {
    pub fn new(
        a: Matrix,
        b1: Matrix,
        b2: Matrix,
        c1: Matrix,
        c2: Matrix,
        d12: Matrix,
        d21: Matrix,
    ) -> Result<Self> {
        let tol = Tolerances::DEFAULT;
        if a.nrows() != a.ncols() {
            return Err(Error::PlantInvariant(format!(
                "A must be square, got {}x{}",
                a.nrows(),
                a.ncols()
            )));
        }
        let n = a.nrows();
        let checks = [
            (b1.nrows() == n, "B1 row count must equal the state dimension"),
            (b2.nrows() == n, "B2 row count must equal the state dimension"),
            (c1.ncols() == n, "C1 column count must equal the state dimension"),
            (c2.ncols() == n, "C2 column count must equal the state dimension"),
            (d12.nrows() == c1.nrows(), "D12 rows must match C1 rows"),
            (d12.ncols() == b2.ncols(), "D12 columns must match B2 columns"),
            (d21.nrows() == c2.nrows(), "D21 rows must match C2 rows"),
            (d21.ncols() == b1.ncols(), "D21 columns must match B1 columns"),
        ];
        for (ok, msg) in checks {
            if !ok {
                return Err(Error::PlantInvariant(msg.to_string()));
            }
        }
        for (m, ctx) in [
            (&a, "Plant A"),
            (&b1, "Plant B1"),
            (&b2, "Plant B2"),
            (&c1, "Plant C1"),
            (&c2, "Plant C2"),
            (&d12, "Plant D12"),
            (&d21, "Plant D21"),
        ] {
            check_finite(m, ctx)?;
        }
        let radius = spectral_radius(&a);
        if radius >= 1.0 - tol.stability_margin {
            return Err(Error::PlantInvariant(format!(
                "A not stable (spectral radius {radius:.6} >= 1)"
            )));
        }
        check_definite(&(d12.transpose() * &d12), "D12'D12 not positive definite")?;
        check_definite(&(&d21 * d21.transpose()), "D21 D21' not positive definite")?;
        Ok(Self { a, b1, b2, c1, c2, d12, d21 })
    }

    pub fn a(&self) -> &Matrix {
        &self.a
    }
    pub fn b1(&self) -> &Matrix {
        &self.b1
    }
    pub fn b2(&self) -> &Matrix {
        &self.b2
    }
    pub fn c1(&self) -> &Matrix {
        &self.c1
    }
    pub fn c2(&self) -> &Matrix {
        &self.c2
    }
    pub fn d12(&self) -> &Matrix {
        &self.d12
    }
    pub fn d21(&self) -> &Matrix {
        &self.d21
    }

    /// State dimension.
    pub fn n(&self) -> usize {
        self.a.nrows()
    }
    /// Disturbance input dimension.
    pub fn m1(&self) -> usize {
        self.b1.ncols()
    }
    /// Control input dimension.
    pub fn p2(&self) -> usize {
        self.b2.ncols()
    }
    /// Performance output dimension.
    pub fn q1(&self) -> usize {
        self.c1.nrows()
    }
    /// Measurement dimension.
    pub fn q2(&self) -> usize {
        self.c2.nrows()
    }

    /// Spectral radius of the state matrix.
    pub fn radius(&self) -> f64 {
        spectral_radius(&self.a)
    }

    /// P11 = C1 (zI-A)^-1 B1.
    pub fn p11(&self) -> StateSpace {
        StateSpace::new(
            self.a.clone(),
            self.b1.clone(),
            self.c1.clone(),
            Matrix::zeros(self.q1(), self.m1()),
        )
        .expect("validated plant blocks are conformable")
    }

    /// P12 = C1 (zI-A)^-1 B2 + D12.
    pub fn p12(&self) -> StateSpace {
        StateSpace::new(self.a.clone(), self.b2.clone(), self.c1.clone(), self.d12.clone())
            .expect("validated plant blocks are conformable")
    }

    /// P21 = C2 (zI-A)^-1 B1 + D21.
    pub fn p21(&self) -> StateSpace {
        StateSpace::new(self.a.clone(), self.b1.clone(), self.c2.clone(), self.d21.clone())
            .expect("validated plant blocks are conformable")
    }

    /// P22 = C2 (zI-A)^-1 B2 (strictly proper).
    pub fn p22(&self) -> StateSpace {
        StateSpace::new(
            self.a.clone(),
            self.b2.clone(),
            self.c2.clone(),
            Matrix::zeros(self.q2(), self.p2()),
        )
        .expect("validated plant blocks are conformable")
    }

    /// Transposed dual plant: estimation data swapped with control data.
    pub fn dual(&self) -> Plant {
        Plant::new(
            self.a.transpose(),
            self.c1.transpose(),
            self.c2.transpose(),
            self.b1.transpose(),
            self.b2.transpose(),
            self.d21.transpose(),
            self.d12.transpose(),
        )
        .expect("dual of a valid plant is valid")
    }
}

fn check_definite(m: &Matrix, message: &str) -> Result<()> {
    let eig = m.clone().symmetric_eigen();
    let max_eig = eig.eigenvalues.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min_eig = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    if min_eig <= Tolerances::DEFAULT.psd_floor * max_eig.max(0.0) {
        return Err(Error::PlantInvariant(format!("{message} (min eigenvalue {min_eig:.3e})")));
    }
    Ok(())
}

/// Stabilizing solution of the control Riccati equation.
#[derive(Debug, Clone)]
pub struct ControlSolution {
    /// Symmetric PSD solution X.
    pub x: Matrix,
    /// Regulator gain K = -Omega^-1 (B2' X A + D12' C1).
    pub k: Matrix,
    /// Omega = D12'D12 + B2' X B2.
    pub omega: Matrix,
    /// Symmetric square root Omega^{1/2}.
    pub omega_half: Matrix,
    /// Omega^{-1/2}.
    pub omega_half_inv: Matrix,
    /// Spectral radius of A + B2 K.
    pub closed_loop_radius: f64,
}

impl ControlSolution {
    /// Frobenius norm of the Riccati equation residual at X.
    pub fn residual(&self, plant: &Plant) -> f64 {
        (control_riccati_map(plant, &self.x) - &self.x).norm()
    }
}

/// Stabilizing solution of the estimation Riccati equation.
#[derive(Debug, Clone)]
pub struct EstimationSolution {
    /// Symmetric PSD solution Y.
    pub y: Matrix,
    /// Filter gain L = -(A Y C2' + B1 D21') Psi^-1.
    pub l: Matrix,
    /// Psi = D21 D21' + C2 Y C2'.
    pub psi: Matrix,
    /// Symmetric square root Psi^{1/2}.
    pub psi_half: Matrix,
    /// Psi^{-1/2}.
    pub psi_half_inv: Matrix,
    /// Spectral radius of A + L C2.
    pub closed_loop_radius: f64,
}

impl EstimationSolution {
    /// Frobenius norm of the Riccati equation residual at Y.
    pub fn residual(&self, plant: &Plant) -> f64 {
        (estimation_riccati_map(plant, &self.y) - &self.y).norm()
    }
}

/// One application of the control Riccati map at X.
pub(crate) fn control_riccati_map(plant: &Plant, x: &Matrix) -> Matrix {
    let omega = plant.d12.transpose() * &plant.d12 + plant.b2.transpose() * x * &plant.b2;
    let s = plant.a.transpose() * x * &plant.b2 + plant.c1.transpose() * &plant.d12;
    let solved = omega
        .clone()
        .cholesky()
        .map(|ch| ch.solve(&s.transpose()))
        .unwrap_or_else(|| omega.clone().lu().solve(&s.transpose()).expect("Omega invertible"));
    plant.c1.transpose() * &plant.c1 + plant.a.transpose() * x * &plant.a - &s * solved
}

/// One application of the estimation Riccati map at Y.
pub(crate) fn estimation_riccati_map(plant: &Plant, y: &Matrix) -> Matrix {
    let psi = &plant.d21 * plant.d21.transpose() + &plant.c2 * y * plant.c2.transpose();
    let s = &plant.a * y * plant.c2.transpose() + &plant.b1 * plant.d21.transpose();
    let solved = psi
        .clone()
        .cholesky()
        .map(|ch| ch.solve(&s.transpose()))
        .unwrap_or_else(|| psi.clone().lu().solve(&s.transpose()).expect("Psi invertible"));
    &plant.b1 * plant.b1.transpose() + &plant.a * y * plant.a.transpose() - &s * solved
}

fn iterate_to_fixed_point(
    plant: &Plant,
    map: impl Fn(&Plant, &Matrix) -> Matrix,
    context: &'static str,
) -> Result<Matrix> {
    let tol = Tolerances::DEFAULT;
    let n = plant.n();
    let mut x = Matrix::zeros(n, n);
    for _ in 0..tol.riccati_max_iterations {
        let mut next = map(plant, &x);
        // symmetrize to stop rounding drift from accumulating
        next = (&next + next.transpose()) * 0.5;
        let step = (&next - &x).norm();
        let done = step <= tol.riccati_step * (1.0 + next.norm());
        x = next;
        if done {
            let residual = (map(plant, &x) - &x).norm();
            if residual > tol.riccati_residual * (1.0 + x.norm()) {
                return Err(Error::NoConvergence {
                    context,
                    iterations: tol.riccati_max_iterations,
                });
            }
            return Ok(x);
        }
    }
    Err(Error::NoConvergence { context, iterations: tol.riccati_max_iterations })
}

/// Solve the control Riccati equation
///
/// X = C1'C1 + A'XA - (A'XB2 + C1'D12) Omega^-1 (B2'XA + D12'C1),
/// Omega = D12'D12 + B2'XB2,
///
/// and return the stabilizing solution with its regulator gain.
pub fn control_dare(plant: &Plant) -> Result<ControlSolution> {
    let tol = Tolerances::DEFAULT;
    let x = iterate_to_fixed_point(plant, control_riccati_map, "control_dare")?;
    let omega = plant.d12.transpose() * &plant.d12 + plant.b2.transpose() * &x * &plant.b2;
    let omega = (&omega + omega.transpose()) * 0.5;
    let s = plant.b2.transpose() * &x * &plant.a + plant.d12.transpose() * &plant.c1;
    let k = -omega
        .clone()
        .lu()
        .solve(&s)
        .ok_or(Error::NotPositiveDefinite { context: "Omega", min_eig: 0.0 })?;
    let closed_loop_radius = spectral_radius(&(&plant.a + &plant.b2 * &k));
    if closed_loop_radius >= 1.0 - tol.stability_margin {
        return Err(Error::NotStabilizing { context: "A + B2 K", radius: closed_loop_radius });
    }
    let roots = sqrtm_spd(&omega)?;
    Ok(ControlSolution {
        x,
        k,
        omega,
        omega_half: roots.sqrt,
        omega_half_inv: roots.inv_sqrt,
        closed_loop_radius,
    })
}

/// Solve the estimation Riccati equation
///
/// Y = B1B1' + AYA' - (AYC2' + B1D21') Psi^-1 (C2YA' + D21B1'),
/// Psi = D21 D21' + C2 Y C2',
///
/// and return the stabilizing solution with its filter gain.
pub fn estimation_dare(plant: &Plant) -> Result<EstimationSolution> {
    let tol = Tolerances::DEFAULT;
    let y = iterate_to_fixed_point(plant, estimation_riccati_map, "estimation_dare")?;
    let psi = &plant.d21 * plant.d21.transpose() + &plant.c2 * &y * plant.c2.transpose();
    let psi = (&psi + psi.transpose()) * 0.5;
    let s = &plant.a * &y * plant.c2.transpose() + &plant.b1 * plant.d21.transpose();
    let l = -psi
        .clone()
        .lu()
        .solve(&s.transpose())
        .ok_or(Error::NotPositiveDefinite { context: "Psi", min_eig: 0.0 })?
        .transpose();
    let closed_loop_radius = spectral_radius(&(&plant.a + &l * &plant.c2));
    if closed_loop_radius >= 1.0 - tol.stability_margin {
        return Err(Error::NotStabilizing { context: "A + L C2", radius: closed_loop_radius });
    }
    let roots = sqrtm_spd(&psi)?;
    Ok(EstimationSolution {
        y,
        l,
        psi,
        psi_half: roots.sqrt,
        psi_half_inv: roots.inv_sqrt,
        closed_loop_radius,
    })
}
