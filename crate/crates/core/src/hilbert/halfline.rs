//! Discretized `Q > 0` sector of the affine pair `(Q, D)`.
//!
//! States are stored as `c_i = √w_i ψ(x_i)` so that the grid inner product is
//! the Euclidean one and Hermitian matrices are Hermitian operators.
//!
//! On the geometric grid `x = e^u` the map `ψ ↦ e^{u/2} ψ(e^u)` turns the
//! dilation generator `−iħ(x d/dx + ½)` into `−iħ d/du`, which is discretized
//! with the periodic Fourier differentiation matrix. The linear grid uses
//! second-order central differences for `P` and builds `D = Q^{1/2} P Q^{1/2}`.

use std::f64::consts::PI;

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{EqError, Result};
use crate::hilbert::StateVector;
use crate::linalg::{c, symmetrize, CMatrix, CVector, HermitianGenerator, I};

pub const MIN_GRID_POINTS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum GridKind {
    #[default]
    Geometric,
    Linear,
}

#[derive(Debug, Clone)]
pub struct HalfLineGrid {
    kind: GridKind,
    points: Vec<f64>,
    weights: Vec<f64>,
    /// Spacing in `u = ln x` (geometric) or in `x` (linear).
    spacing: f64,
}

impl HalfLineGrid {
    pub fn kind(&self) -> GridKind {
        self.kind
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Matrices of the affine pair on a positive grid.
///
/// `p_formal` is `P = Q^{-1/2} D Q^{-1/2}` (geometric) or the central
/// difference momentum (linear). It is Hermitian as a matrix but `P` is not
/// self-adjoint on the half-line, so it is only used inside expectation
/// values and never exponentiated.
#[derive(Debug, Clone)]
pub struct HalfLineRep {
    grid: HalfLineGrid,
    hbar: f64,
    q: CMatrix,
    d: CMatrix,
    p_formal: CMatrix,
}

impl HalfLineRep {
    pub fn new(x_min: f64, x_max: f64, n: usize, hbar: f64, kind: GridKind) -> Result<Self> {
        if !(x_min > 0.0) {
            return Err(EqError::domain(format!(
                "half-line grid needs x_min > 0, got {x_min}"
            )));
        }
        if !(x_max > x_min) || !x_max.is_finite() {
            return Err(EqError::invalid(format!(
                "half-line grid needs x_max > x_min, got [{x_min}, {x_max}]"
            )));
        }
        if n < MIN_GRID_POINTS {
            return Err(EqError::invalid(format!(
                "half-line grid needs at least {MIN_GRID_POINTS} points, got {n}"
            )));
        }
        if !(hbar > 0.0) || !hbar.is_finite() {
            return Err(EqError::invalid(format!(
                "hbar must be positive, got {hbar}"
            )));
        }
        let grid = match kind {
            GridKind::Geometric => {
                let (u0, u1) = (x_min.ln(), x_max.ln());
                let h = (u1 - u0) / (n - 1) as f64;
                let points: Vec<f64> = (0..n).map(|i| (u0 + i as f64 * h).exp()).collect();
                let weights = points.iter().map(|x| x * h).collect();
                HalfLineGrid {
                    kind,
                    points,
                    weights,
                    spacing: h,
                }
            }
            GridKind::Linear => {
                let h = (x_max - x_min) / (n - 1) as f64;
                let points = (0..n).map(|i| x_min + i as f64 * h).collect();
                HalfLineGrid {
                    kind,
                    points,
                    weights: vec![h; n],
                    spacing: h,
                }
            }
        };

        let q = CMatrix::from_diagonal(&CVector::from_iterator(
            n,
            grid.points.iter().map(|&x| c(x)),
        ));
        let (d, p_formal) = match kind {
            GridKind::Geometric => {
                let d = fourier_derivative(n, grid.spacing) * (-I * hbar);
                let p = diag_sandwich(&d, &grid.points, -0.5);
                (d, p)
            }
            GridKind::Linear => {
                let p = central_derivative(n, grid.spacing) * (-I * hbar);
                let d = diag_sandwich(&p, &grid.points, 0.5);
                (d, p)
            }
        };
        Ok(Self {
            grid,
            hbar,
            q,
            d: symmetrize(&d),
            p_formal: symmetrize(&p_formal),
        })
    }

    pub fn grid(&self) -> &HalfLineGrid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.grid.len()
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn q(&self) -> &CMatrix {
        &self.q
    }

    pub fn d(&self) -> &CMatrix {
        &self.d
    }

    /// Formal, non-self-adjoint momentum. See the type-level docs.
    pub fn p_formal(&self) -> &CMatrix {
        &self.p_formal
    }

    /// Diagonal `Q^k` for any real power (the spectrum is strictly positive).
    pub fn q_power(&self, k: f64) -> CMatrix {
        diag_power(&self.grid.points, k)
    }

    /// Spectral decomposition of `D`, the generator of dilations.
    ///
    /// On the geometric grid the eigenvectors are the discrete Fourier modes
    /// in `u = ln x`.
    pub fn dilation_generator(&self) -> Result<HermitianGenerator> {
        match self.grid.kind {
            GridKind::Linear => HermitianGenerator::new(&self.d, self.hbar),
            GridKind::Geometric => {
                let n = self.dim();
                let period = n as f64 * self.grid.spacing;
                let norm = (n as f64).sqrt();
                let mut values = DVector::zeros(n);
                let mut vectors = CMatrix::zeros(n, n);
                for col in 0..n {
                    // wavenumbers −⌊(n−1)/2⌋ … ⌊(n−1)/2⌋, plus the Nyquist mode for even n
                    let m = col as i64 - ((n as i64 - 1) / 2);
                    let nyquist = n.is_multiple_of(2) && col == n - 1;
                    let k = if nyquist {
                        0.0
                    } else {
                        2.0 * PI * m as f64 / period
                    };
                    let m_eff = if nyquist { n as i64 / 2 } else { m };
                    values[col] = self.hbar * k;
                    for j in 0..n {
                        let angle = 2.0 * PI * (m_eff * j as i64) as f64 / n as f64;
                        vectors[(j, col)] = Complex64::from_polar(1.0 / norm, angle);
                    }
                }
                HermitianGenerator::from_spectral(values, vectors, self.hbar)
            }
        }
    }

    /// Samples a wavefunction `ψ(x)` into normalized grid coefficients.
    pub fn sample<F>(&self, psi: F) -> Result<StateVector>
    where
        F: Fn(f64) -> Complex64,
    {
        let v = CVector::from_iterator(
            self.dim(),
            self.grid
                .points
                .iter()
                .zip(&self.grid.weights)
                .map(|(&x, &w)| psi(x) * w.sqrt()),
        );
        StateVector::normalized(v)
    }

    /// Returns `(⟨ψ|[Q,D]|ψ⟩, iħ⟨ψ|Q|ψ⟩)`.
    pub fn commutator_residual(&self, state: &StateVector) -> Result<(Complex64, Complex64)> {
        if state.dim() != self.dim() {
            return Err(EqError::invalid("state does not live on this grid"));
        }
        let qv = &self.q * state.amplitudes();
        let dv = &self.d * state.amplitudes();
        let lhs = qv.dotc(&dv) - dv.dotc(&qv);
        let rhs = I * self.hbar * state.expectation(&self.q)?;
        Ok((lhs, rhs))
    }
}

/// `X^k A X^k` for diagonal `X`, without dense products.
fn diag_sandwich(a: &CMatrix, points: &[f64], k: f64) -> CMatrix {
    let s: Vec<f64> = points.iter().map(|x| x.powf(k)).collect();
    CMatrix::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)] * (s[i] * s[j]))
}

/// Geometric-grid constructor, the default discretization.
pub fn build_halfline_rep(x_min: f64, x_max: f64, n: usize, hbar: f64) -> Result<HalfLineRep> {
    HalfLineRep::new(x_min, x_max, n, hbar, GridKind::Geometric)
}

fn diag_power(points: &[f64], k: f64) -> CMatrix {
    CMatrix::from_diagonal(&CVector::from_iterator(
        points.len(),
        points.iter().map(|&x| c(x.powf(k))),
    ))
}

/// Periodic Fourier differentiation matrix for `n` points of spacing `h`.
fn fourier_derivative(n: usize, h: f64) -> CMatrix {
    let period = n as f64 * h;
    let scale = 2.0 * std::f64::consts::PI / period;
    let mut m = CMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let k = i as i64 - j as i64;
            let sign = if k.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            let arg = k as f64 * std::f64::consts::PI / n as f64;
            let val = if n.is_multiple_of(2) {
                0.5 * sign / arg.tan()
            } else {
                0.5 * sign / arg.sin()
            };
            m[(i, j)] = c(scale * val);
        }
    }
    m
}

fn central_derivative(n: usize, h: f64) -> CMatrix {
    let mut m = CMatrix::zeros(n, n);
    for i in 0..n - 1 {
        m[(i, i + 1)] = c(0.5 / h);
        m[(i + 1, i)] = c(-0.5 / h);
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::hermitian_defect;

    fn smooth_state(rep: &HalfLineRep) -> StateVector {
        // Gamma-like bump centred near x = 1
        rep.sample(|x| c(x.powf(2.5) * (-3.0 * x).exp())).unwrap()
    }

    #[test]
    fn q_is_diagonal_with_grid_values() {
        let rep = HalfLineRep::new(0.125, 2.125, 17, 1.0, GridKind::Linear).unwrap();
        let idx = rep
            .grid()
            .points()
            .iter()
            .position(|&x| (x - 0.5).abs() < 1e-12)
            .unwrap();
        let e = StateVector::basis(rep.dim(), idx).unwrap();
        let qe = rep.q() * e.amplitudes();
        assert!((qe - e.amplitudes().scale(0.5)).norm() < 1e-14);
    }

    #[test]
    fn grid_size_boundary() {
        assert!(build_halfline_rep(0.01, 10.0, 16, 1.0).is_ok());
        assert!(matches!(
            build_halfline_rep(0.01, 10.0, 15, 1.0),
            Err(EqError::InvalidArgument(_))
        ));
        assert!(matches!(
            build_halfline_rep(0.0, 10.0, 64, 1.0),
            Err(EqError::DomainViolation(_))
        ));
        assert!(matches!(
            build_halfline_rep(-1.0, 10.0, 64, 1.0),
            Err(EqError::DomainViolation(_))
        ));
        assert!(build_halfline_rep(2.0, 1.0, 64, 1.0).is_err());
    }

    #[test]
    fn operators_hermitian_and_spectrum_positive() {
        for kind in [GridKind::Geometric, GridKind::Linear] {
            let rep = HalfLineRep::new(1e-3, 30.0, 64, 0.5, kind).unwrap();
            assert!(hermitian_defect(rep.d()) < 1e-14);
            assert!(hermitian_defect(rep.p_formal()) < 1e-14);
            assert!(rep.grid().points().iter().all(|&x| x > 0.0));
        }
    }

    #[test]
    fn affine_commutator_on_interior_state() {
        // converged by refinement: the relative error is already below 1e-10 at n = 512
        let mut last = f64::INFINITY;
        for n in [128, 256, 512] {
            let rep = build_halfline_rep(1e-7, 40.0, n, 1.0).unwrap();
            let psi = smooth_state(&rep);
            let (lhs, rhs) = rep.commutator_residual(&psi).unwrap();
            let rel = (lhs - rhs).norm() / rhs.norm();
            assert!(rel <= last * 1.0001 || rel < 1e-12);
            last = rel;
        }
        assert!(last < 1e-4, "relative commutator error {last}");
    }

    #[test]
    fn linear_grid_commutator_converges() {
        let rep = HalfLineRep::new(1e-4, 12.0, 1500, 1.0, GridKind::Linear).unwrap();
        let psi = smooth_state(&rep);
        let (lhs, rhs) = rep.commutator_residual(&psi).unwrap();
        assert!((lhs - rhs).norm() / rhs.norm() < 1e-4);
    }

    #[test]
    fn spectral_dilation_generator_reassembles_d() {
        for n in [64, 65] {
            let rep = build_halfline_rep(1e-3, 20.0, n, 0.7).unwrap();
            let g = rep.dilation_generator().unwrap();
            assert!(
                (g.matrix() - rep.d()).norm() / rep.d().norm() < 1e-12,
                "n = {n}"
            );
        }
    }

    #[test]
    fn dilation_generator_differentiates_in_log_variable() {
        // D acting on e^{u/2}ψ(e^u) with ψ = x^a e^{-x}: −iħ(xψ' + ψ/2)
        let rep = build_halfline_rep(1e-8, 60.0, 400, 1.0).unwrap();
        let a = 3.0;
        let v = CVector::from_iterator(
            rep.dim(),
            rep.grid()
                .points()
                .iter()
                .zip(rep.grid().weights())
                .map(|(&x, &w)| c(w.sqrt() * x.powf(a) * (-x).exp())),
        );
        let dv = rep.d() * &v;
        for (k, (&x, &w)) in rep
            .grid()
            .points()
            .iter()
            .zip(rep.grid().weights())
            .enumerate()
        {
            let exact = -I * (a * x.powf(a) - x.powf(a + 1.0) + 0.5 * x.powf(a)) * (-x).exp();
            assert!((dv[k] - exact * w.sqrt()).norm() < 1e-9, "x={x}");
        }
    }
}
