//! Dense matrix kernels: SPD square roots, discrete Lyapunov and Sylvester
//! equations, spectral radii and SPD solves.
//!
//! All routines work on `nalgebra::DMatrix<f64>` and are pure; thresholds
//! come from [`Tolerances::DEFAULT`].

use crate::error::{Error, Result};
use crate::tol::Tolerances;
use crate::{Matrix, Vector};

/// Symmetric square root of an SPD matrix together with its inverse.
#[derive(Debug, Clone)]
pub struct SpdSqrt {
    /// Symmetric S with S * S = M.
    pub sqrt: Matrix,
    /// S^-1, also symmetric.
    pub inv_sqrt: Matrix,
}

/// Reject matrices containing NaN or infinities.
pub fn check_finite(m: &Matrix, context: &'static str) -> Result<()> {
    for c in 0..m.ncols() {
        for r in 0..m.nrows() {
            if !m[(r, c)].is_finite() {
                return Err(Error::NonFinite { context, row: r, col: c });
            }
        }
    }
    Ok(())
}

fn check_symmetric(m: &Matrix, context: &'static str) -> Result<()> {
    let asym = (m - m.transpose()).norm() / m.norm().max(1.0);
    if asym > Tolerances::DEFAULT.symmetry {
        return Err(Error::NotSymmetric { context, asymmetry: asym });
    }
    Ok(())
}

/// Eigenvalues via a Schur decomposition with a bounded iteration count.
///
/// Returns `None` when the QR iteration does not converge, which happens
/// for some highly degenerate spectra (long nilpotent shift chains from
/// realization compositions); callers fall back to norm-based estimates.
pub(crate) fn try_complex_eigenvalues(
    a: &Matrix,
    max_iter: usize,
) -> Option<Vec<num_complex::Complex<f64>>> {
    nalgebra::linalg::Schur::try_new(a.clone(), f64::EPSILON, max_iter)
        .map(|schur| schur.complex_eigenvalues().iter().cloned().collect())
}

/// Largest eigenvalue magnitude of a square matrix.
pub fn spectral_radius(a: &Matrix) -> f64 {
    assert_eq!(a.nrows(), a.ncols(), "spectral_radius needs a square matrix");
    if a.nrows() == 0 {
        return 0.0;
    }
    if let Some(eigs) = try_complex_eigenvalues(a, 100 * a.nrows().max(10)) {
        return eigs.iter().map(|l| l.norm()).fold(0.0, f64::max);
    }
    gelfand_radius(a)
}

/// Spectral radius by the norm limit ||A^k||^{1/k} with k = 2^j, computed
/// by normalized repeated squaring. Converges to full precision in at most
/// 64 doublings because the correction terms carry a 2^-j weight.
fn gelfand_radius(a: &Matrix) -> f64 {
    let norm = a.norm();
    if norm == 0.0 {
        return 0.0;
    }
    let mut m = a / norm;
    let mut log_rho = norm.ln();
    let mut weight = 0.5;
    for _ in 0..64 {
        let squared = &m * &m;
        let n = squared.norm();
        if n == 0.0 {
            // A^(2^j) vanished exactly: the matrix is nilpotent
            return 0.0;
        }
        m = squared / n;
        log_rho += weight * n.ln();
        weight *= 0.5;
    }
    log_rho.exp()
}

/// Symmetric square root of a symmetric positive definite matrix.
///
/// Uses a symmetric eigendecomposition; fails if the input is asymmetric
/// beyond tolerance or has an eigenvalue at or below the PSD floor.
pub fn sqrtm_spd(m: &Matrix) -> Result<SpdSqrt> {
    let tol = Tolerances::DEFAULT;
    check_symmetric(m, "sqrtm_spd")?;
    let sym = (m + m.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    let max_eig = eig.eigenvalues.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min_eig = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    if min_eig <= tol.psd_floor * max_eig.max(0.0) {
        return Err(Error::NotPositiveDefinite { context: "sqrtm_spd input", min_eig });
    }
    let v = &eig.eigenvectors;
    let sqrt_l = Matrix::from_diagonal(&eig.eigenvalues.map(f64::sqrt));
    let inv_sqrt_l = Matrix::from_diagonal(&eig.eigenvalues.map(|l| 1.0 / l.sqrt()));
    Ok(SpdSqrt {
        sqrt: v * sqrt_l * v.transpose(),
        inv_sqrt: v * inv_sqrt_l * v.transpose(),
    })
}

/// Solve the discrete Lyapunov equation W = A W A' + Q for stable A.
///
/// Doubling iteration: accumulates sum_k A^k Q A'^k, squaring A each step,
/// so convergence is quadratic. The residual is verified on exit.
pub fn dlyap(a: &Matrix, q: &Matrix) -> Result<Matrix> {
    let tol = Tolerances::DEFAULT;
    check_symmetric(q, "dlyap right-hand side")?;
    let radius = spectral_radius(a);
    if radius >= 1.0 - tol.stability_margin {
        return Err(Error::Unstable { context: "dlyap", radius });
    }
    let w = accumulate_gramian(a, a, q);
    let residual = (&w - a * &w * a.transpose() - q).norm();
    let bound = tol.lyap_residual * (q.norm() + w.norm());
    if residual > bound && residual > tol.lyap_residual {
        return Err(Error::NoConvergence { context: "dlyap", iterations: MAX_DOUBLINGS });
    }
    Ok(w)
}

/// Solve the cross Gramian equation W = A_l W A_r' + M for stable A_l, A_r.
///
/// This is the Sylvester-type equation behind inner products of two stable
/// realizations.
pub fn dsylv(a_left: &Matrix, a_right: &Matrix, m: &Matrix) -> Result<Matrix> {
    let tol = Tolerances::DEFAULT;
    for (a, context) in [(a_left, "dsylv left factor"), (a_right, "dsylv right factor")] {
        let radius = spectral_radius(a);
        if radius >= 1.0 - tol.stability_margin {
            return Err(Error::Unstable { context, radius });
        }
    }
    let w = accumulate_gramian(a_left, a_right, m);
    let residual = (&w - a_left * &w * a_right.transpose() - m).norm();
    let bound = tol.lyap_residual * (m.norm() + w.norm());
    if residual > bound && residual > tol.lyap_residual {
        return Err(Error::NoConvergence { context: "dsylv", iterations: MAX_DOUBLINGS });
    }
    Ok(w)
}

const MAX_DOUBLINGS: usize = 100;

fn accumulate_gramian(a_left: &Matrix, a_right: &Matrix, m: &Matrix) -> Matrix {
    let mut w = m.clone();
    let mut p = a_left.clone();
    let mut r = a_right.clone();
    for _ in 0..MAX_DOUBLINGS {
        let update = &p * &w * r.transpose();
        let norm = update.norm();
        w += update;
        if norm <= f64::EPSILON * w.norm() {
            break;
        }
        p = &p * &p;
        r = &r * &r;
    }
    w
}

/// Solve H v = g for symmetric positive definite H.
pub fn solve_spd(h: &Matrix, g: &Vector) -> Result<Vector> {
    let tol = Tolerances::DEFAULT;
    check_symmetric(h, "solve_spd")?;
    let sym = (h + h.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    let max_eig = eig.eigenvalues.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min_eig = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    if min_eig <= tol.psd_floor * max_eig.max(0.0) {
        return Err(Error::SingularHessian { min_eig, max_eig });
    }
    let v = &eig.eigenvectors;
    let scaled = Matrix::from_diagonal(&eig.eigenvalues.map(|l| 1.0 / l));
    Ok(v * scaled * v.transpose() * g)
}
