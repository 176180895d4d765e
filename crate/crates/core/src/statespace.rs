//! State-space realizations, FIR transfer matrices, realization arithmetic,
//! Markov parameters, H2 norms and inner products.
//!
//! A [`StateSpace`] holds a real discrete-time quadruple (A, B, C, D)
//! representing G(z) = C (zI - A)^-1 B + D. Stability is never assumed by
//! the type itself; operations that need it check the spectral radius.
//! Compositions keep stacked states; no minimal realization is attempted.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::numerics::{check_finite, dlyap, dsylv, spectral_radius};
use crate::tol::Tolerances;
use crate::{CMatrix, Matrix};

/// Real discrete-time state-space realization.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSpace {
    a: Matrix,
    b: Matrix,
    c: Matrix,
    d: Matrix,
}

impl StateSpace {
    /// Build a realization, validating conformability and finiteness.
    pub fn new(a: Matrix, b: Matrix, c: Matrix, d: Matrix) -> Result<Self> {
        if a.nrows() != a.ncols() {
            return Err(Error::DimensionMismatch {
                context: "StateSpace::new",
                details: format!("A must be square, got {}x{}", a.nrows(), a.ncols()),
            });
        }
        let n = a.nrows();
        if b.nrows() != n || c.ncols() != n || d.nrows() != c.nrows() || d.ncols() != b.ncols() {
            return Err(Error::DimensionMismatch {
                context: "StateSpace::new",
                details: format!(
                    "A {}x{}, B {}x{}, C {}x{}, D {}x{} are not conformable",
                    a.nrows(),
                    a.ncols(),
                    b.nrows(),
                    b.ncols(),
                    c.nrows(),
                    c.ncols(),
                    d.nrows(),
                    d.ncols()
                ),
            });
        }
        check_finite(&a, "StateSpace A")?;
        check_finite(&b, "StateSpace B")?;
        check_finite(&c, "StateSpace C")?;
        check_finite(&d, "StateSpace D")?;
        Ok(Self { a, b, c, d })
    }

    /// Static gain: no states, G(z) = D.
    pub fn from_static(d: Matrix) -> Self {
        let (p, q) = (d.nrows(), d.ncols());
        Self {
            a: Matrix::zeros(0, 0),
            b: Matrix::zeros(0, q),
            c: Matrix::zeros(p, 0),
            d,
        }
    }

    /// Identity gain of the given size.
    pub fn identity(size: usize) -> Self {
        Self::from_static(Matrix::identity(size, size))
    }

    /// Zero system of the given output/input dimensions.
    pub fn zero(outputs: usize, inputs: usize) -> Self {
        Self::from_static(Matrix::zeros(outputs, inputs))
    }

    pub fn a(&self) -> &Matrix {
        &self.a
    }
    pub fn b(&self) -> &Matrix {
        &self.b
    }
    pub fn c(&self) -> &Matrix {
        &self.c
    }
    pub fn d(&self) -> &Matrix {
        &self.d
    }

    /// Number of states.
    pub fn state_dim(&self) -> usize {
        self.a.nrows()
    }
    /// Number of inputs.
    pub fn input_dim(&self) -> usize {
        self.b.ncols()
    }
    /// Number of outputs.
    pub fn output_dim(&self) -> usize {
        self.c.nrows()
    }

    /// Spectral radius of the state matrix.
    pub fn radius(&self) -> f64 {
        spectral_radius(&self.a)
    }

    /// Output negation: realization of -G(z).
    pub fn neg(&self) -> Self {
        Self {
            a: self.a.clone(),
            b: self.b.clone(),
            c: -&self.c,
            d: -&self.d,
        }
    }

    /// Left-multiply by a constant matrix: realization of M * G(z).
    pub fn scale_output(&self, m: &Matrix) -> Result<Self> {
        if m.ncols() != self.output_dim() {
            return Err(Error::DimensionMismatch {
                context: "scale_output",
                details: format!("{} columns vs {} outputs", m.ncols(), self.output_dim()),
            });
        }
        Ok(Self {
            a: self.a.clone(),
            b: self.b.clone(),
            c: m * &self.c,
            d: m * &self.d,
        })
    }

    /// Right-multiply by a constant matrix: realization of G(z) * M.
    pub fn scale_input(&self, m: &Matrix) -> Result<Self> {
        if m.nrows() != self.input_dim() {
            return Err(Error::DimensionMismatch {
                context: "scale_input",
                details: format!("{} rows vs {} inputs", m.nrows(), self.input_dim()),
            });
        }
        Ok(Self {
            a: self.a.clone(),
            b: &self.b * m,
            c: self.c.clone(),
            d: &self.d * m,
        })
    }

    /// Realization of the inverse, requiring an invertible feedthrough.
    ///
    /// G^-1 = (A - B D^-1 C, B D^-1, -D^-1 C, D^-1). The result is a valid
    /// transfer inverse wherever G is invertible; no stability is implied.
    pub fn inverse(&self) -> Result<Self> {
        if self.input_dim() != self.output_dim() {
            return Err(Error::DimensionMismatch {
                context: "inverse",
                details: format!("{}x{} system is not square", self.output_dim(), self.input_dim()),
            });
        }
        let d_inv = self.d.clone().try_inverse().ok_or(Error::DimensionMismatch {
            context: "inverse",
            details: "feedthrough D is singular".to_string(),
        })?;
        Ok(Self {
            a: &self.a - &self.b * &d_inv * &self.c,
            b: &self.b * &d_inv,
            c: -&d_inv * &self.c,
            d: d_inv,
        })
    }
}

/// Series interconnection: realization of G1(z) * G2(z) (G2 acts first).
pub fn series(g1: &StateSpace, g2: &StateSpace) -> Result<StateSpace> {
    if g1.input_dim() != g2.output_dim() {
        return Err(Error::DimensionMismatch {
            context: "series",
            details: format!("G1 inputs {} vs G2 outputs {}", g1.input_dim(), g2.output_dim()),
        });
    }
    let (n1, n2) = (g1.state_dim(), g2.state_dim());
    let mut a = Matrix::zeros(n1 + n2, n1 + n2);
    a.view_mut((0, 0), (n1, n1)).copy_from(&g1.a);
    a.view_mut((0, n1), (n1, n2)).copy_from(&(&g1.b * &g2.c));
    a.view_mut((n1, n1), (n2, n2)).copy_from(&g2.a);
    let mut b = Matrix::zeros(n1 + n2, g2.input_dim());
    b.view_mut((0, 0), (n1, g2.input_dim())).copy_from(&(&g1.b * &g2.d));
    b.view_mut((n1, 0), (n2, g2.input_dim())).copy_from(&g2.b);
    let mut c = Matrix::zeros(g1.output_dim(), n1 + n2);
    c.view_mut((0, 0), (g1.output_dim(), n1)).copy_from(&g1.c);
    c.view_mut((0, n1), (g1.output_dim(), n2)).copy_from(&(&g1.d * &g2.c));
    let d = &g1.d * &g2.d;
    StateSpace::new(a, b, c, d)
}

/// Parallel interconnection: realization of G1(z) + G2(z).
pub fn add(g1: &StateSpace, g2: &StateSpace) -> Result<StateSpace> {
    if g1.input_dim() != g2.input_dim() || g1.output_dim() != g2.output_dim() {
        return Err(Error::DimensionMismatch {
            context: "add",
            details: format!(
                "{}x{} vs {}x{}",
                g1.output_dim(),
                g1.input_dim(),
                g2.output_dim(),
                g2.input_dim()
            ),
        });
    }
    let (n1, n2) = (g1.state_dim(), g2.state_dim());
    let mut a = Matrix::zeros(n1 + n2, n1 + n2);
    a.view_mut((0, 0), (n1, n1)).copy_from(&g1.a);
    a.view_mut((n1, n1), (n2, n2)).copy_from(&g2.a);
    let mut b = Matrix::zeros(n1 + n2, g1.input_dim());
    b.view_mut((0, 0), (n1, g1.input_dim())).copy_from(&g1.b);
    b.view_mut((n1, 0), (n2, g1.input_dim())).copy_from(&g2.b);
    let mut c = Matrix::zeros(g1.output_dim(), n1 + n2);
    c.view_mut((0, 0), (g1.output_dim(), n1)).copy_from(&g1.c);
    c.view_mut((0, n1), (g1.output_dim(), n2)).copy_from(&g2.c);
    StateSpace::new(a, b, c, &g1.d + &g2.d)
}

/// First `k` Markov parameters [G_0, ..., G_{k-1}]: G_0 = D, G_i = C A^{i-1} B.
pub fn markov(g: &StateSpace, k: usize) -> Vec<Matrix> {
    let mut out = Vec::with_capacity(k);
    if k == 0 {
        return out;
    }
    out.push(g.d.clone());
    let mut x = g.b.clone();
    for _ in 1..k {
        out.push(&g.c * &x);
        x = &g.a * &x;
    }
    out
}

/// H2 norm of a stable realization.
///
/// sqrt(Tr(D D') + Tr(C W C')) with W the controllability Gramian solving
/// W = A W A' + B B'; equals the root of the summed squared Frobenius norms
/// of the Markov parameters.
pub fn h2_norm(g: &StateSpace) -> Result<f64> {
    // cancellation in the Gramian trace can leave a tiny negative square
    Ok(h2_norm_sq(g)?.max(0.0).sqrt())
}

/// Squared H2 norm; see [`h2_norm`].
pub fn h2_norm_sq(g: &StateSpace) -> Result<f64> {
    let radius = g.radius();
    if radius >= 1.0 - Tolerances::DEFAULT.stability_margin {
        return Err(Error::Unstable { context: "h2_norm", radius });
    }
    let static_part = (&g.d * g.d.transpose()).trace();
    if g.state_dim() == 0 {
        return Ok(static_part);
    }
    let w = dlyap(&g.a, &(&g.b * g.b.transpose()))?;
    Ok(static_part + (&g.c * w * g.c.transpose()).trace())
}

/// H2 inner product <G, H> = sum_i Tr(G_i H_i') of two stable realizations.
///
/// Computed through the cross Gramian W = A_g W A_h' + B_g B_h'.
pub fn inner_product(g: &StateSpace, h: &StateSpace) -> Result<f64> {
    if g.input_dim() != h.input_dim() || g.output_dim() != h.output_dim() {
        return Err(Error::DimensionMismatch {
            context: "inner_product",
            details: format!(
                "{}x{} vs {}x{}",
                g.output_dim(),
                g.input_dim(),
                h.output_dim(),
                h.input_dim()
            ),
        });
    }
    for (sys, context) in [(g, "inner_product left"), (h, "inner_product right")] {
        let radius = sys.radius();
        if radius >= 1.0 - Tolerances::DEFAULT.stability_margin {
            return Err(Error::Unstable { context, radius });
        }
    }
    let static_part = (&g.d * h.d.transpose()).trace();
    if g.state_dim() == 0 || h.state_dim() == 0 {
        return Ok(static_part);
    }
    let w = dsylv(&g.a, &h.a, &(&g.b * h.b.transpose()))?;
    Ok(static_part + (&g.c * w * h.c.transpose()).trace())
}

/// Evaluate G(z) = C (zI - A)^-1 B + D at a complex point.
pub fn evalz(g: &StateSpace, z: Complex<f64>) -> Result<CMatrix> {
    let n = g.state_dim();
    if n == 0 {
        return Ok(g.d.map(|x| Complex::new(x, 0.0)));
    }
    let mut distance = f64::INFINITY;
    if let Some(eigs) = crate::numerics::try_complex_eigenvalues(&g.a, 100 * n.max(10)) {
        distance = eigs.iter().map(|l| (z - l).norm()).fold(f64::INFINITY, f64::min);
        if distance < Tolerances::DEFAULT.resolvent_distance {
            return Err(Error::SingularResolvent { distance });
        }
    }
    let mut resolvent = g.a.map(|x| Complex::new(-x, 0.0));
    for i in 0..n {
        resolvent[(i, i)] += z;
    }
    let bc = g.b.map(|x| Complex::new(x, 0.0));
    let solved = resolvent.lu().solve(&bc).ok_or(Error::SingularResolvent { distance })?;
    let cc = g.c.map(|x| Complex::new(x, 0.0));
    let dc = g.d.map(|x| Complex::new(x, 0.0));
    Ok(cc * solved + dc)
}

/// Realization of z^-N G(z) via N appended output-delay stages.
pub fn delay(g: &StateSpace, n_steps: usize) -> StateSpace {
    if n_steps == 0 {
        return g.clone();
    }
    let n = g.state_dim();
    let p = g.output_dim();
    let q = g.input_dim();
    let total = n + n_steps * p;
    let mut a = Matrix::zeros(total, total);
    a.view_mut((0, 0), (n, n)).copy_from(&g.a);
    a.view_mut((n, 0), (p, n)).copy_from(&g.c);
    for k in 1..n_steps {
        a.view_mut((n + k * p, n + (k - 1) * p), (p, p))
            .copy_from(&Matrix::identity(p, p));
    }
    let mut b = Matrix::zeros(total, q);
    b.view_mut((0, 0), (n, q)).copy_from(&g.b);
    b.view_mut((n, 0), (p, q)).copy_from(&g.d);
    let mut c = Matrix::zeros(p, total);
    c.view_mut((0, n + (n_steps - 1) * p), (p, p))
        .copy_from(&Matrix::identity(p, p));
    StateSpace { a, b, c, d: Matrix::zeros(p, q) }
}

/// Strictly proper FIR transfer matrix sum_{i=1..N} z^-i M_i.
///
/// Lag coefficients are stored in order M_1, ..., M_N; the horizon is the
/// coefficient count and is at least one.
#[derive(Debug, Clone, PartialEq)]
pub struct FirTransfer {
    coefficients: Vec<Matrix>,
}

impl FirTransfer {
    /// Build from lag coefficients M_1..M_N (all of equal dimensions).
    pub fn new(coefficients: Vec<Matrix>) -> Result<Self> {
        if coefficients.is_empty() {
            return Err(Error::DimensionMismatch {
                context: "FirTransfer::new",
                details: "horizon must be at least 1".to_string(),
            });
        }
        let (p, q) = (coefficients[0].nrows(), coefficients[0].ncols());
        for (i, m) in coefficients.iter().enumerate() {
            if m.nrows() != p || m.ncols() != q {
                return Err(Error::DimensionMismatch {
                    context: "FirTransfer::new",
                    details: format!(
                        "lag {} coefficient is {}x{}, expected {}x{}",
                        i + 1,
                        m.nrows(),
                        m.ncols(),
                        p,
                        q
                    ),
                });
            }
            check_finite(m, "FirTransfer coefficient")?;
        }
        Ok(Self { coefficients })
    }

    /// All-zero FIR of the given horizon and dimensions.
    pub fn zeros(horizon: usize, outputs: usize, inputs: usize) -> Self {
        Self {
            coefficients: (0..horizon.max(1)).map(|_| Matrix::zeros(outputs, inputs)).collect(),
        }
    }

    /// Lag coefficients M_1..M_N.
    pub fn coefficients(&self) -> &[Matrix] {
        &self.coefficients
    }

    /// Coefficient at lag `i` (1-based); zero matrix beyond the horizon.
    pub fn coefficient(&self, lag: usize) -> Matrix {
        assert!(lag >= 1, "FIR lags are 1-based");
        self.coefficients
            .get(lag - 1)
            .cloned()
            .unwrap_or_else(|| Matrix::zeros(self.output_dim(), self.input_dim()))
    }

    /// Horizon N.
    pub fn horizon(&self) -> usize {
        self.coefficients.len()
    }

    pub fn output_dim(&self) -> usize {
        self.coefficients[0].nrows()
    }

    pub fn input_dim(&self) -> usize {
        self.coefficients[0].ncols()
    }

    /// Squared H2 norm: sum of squared Frobenius norms of the coefficients.
    pub fn norm_sq(&self) -> f64 {
        self.coefficients.iter().map(|m| m.norm_squared()).sum()
    }

    /// H2 inner product with another FIR (coefficient-wise trace sum).
    pub fn inner(&self, other: &FirTransfer) -> f64 {
        self.coefficients
            .iter()
            .zip(other.coefficients.iter())
            .map(|(a, b)| (a * b.transpose()).trace())
            .sum()
    }

    /// Coefficient-wise sum; horizons must match.
    pub fn add(&self, other: &FirTransfer) -> Result<FirTransfer> {
        if self.horizon() != other.horizon()
            || self.output_dim() != other.output_dim()
            || self.input_dim() != other.input_dim()
        {
            return Err(Error::DimensionMismatch {
                context: "FirTransfer::add",
                details: "horizon or dimensions differ".to_string(),
            });
        }
        FirTransfer::new(
            self.coefficients
                .iter()
                .zip(other.coefficients.iter())
                .map(|(a, b)| a + b)
                .collect(),
        )
    }

    /// Scale every coefficient.
    pub fn scale(&self, factor: f64) -> FirTransfer {
        FirTransfer {
            coefficients: self.coefficients.iter().map(|m| m * factor).collect(),
        }
    }
}

/// Shift-register realization of an FIR transfer matrix.
///
/// The result has N*q states; its Markov parameters reproduce the FIR
/// coefficients exactly at lags 1..N and vanish elsewhere.
pub fn fir_to_ss(f: &FirTransfer) -> StateSpace {
    let n = f.horizon();
    let p = f.output_dim();
    let q = f.input_dim();
    let total = n * q;
    let mut a = Matrix::zeros(total, total);
    for k in 1..n {
        a.view_mut((k * q, (k - 1) * q), (q, q)).copy_from(&Matrix::identity(q, q));
    }
    let mut b = Matrix::zeros(total, q);
    b.view_mut((0, 0), (q, q)).copy_from(&Matrix::identity(q, q));
    let mut c = Matrix::zeros(p, total);
    for (k, m) in f.coefficients.iter().enumerate() {
        c.view_mut((0, k * q), (p, q)).copy_from(m);
    }
    StateSpace { a, b, c, d: Matrix::zeros(p, q) }
}
