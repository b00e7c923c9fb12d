//! Dense complex linear algebra helpers shared by the representation and
//! coherent-state modules.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{EqError, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Relative Frobenius tolerance below which a matrix counts as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-10;

pub(crate) const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[inline]
pub(crate) fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// `‖A − A†‖_F / ‖A‖_F`, or the absolute defect for the zero matrix.
pub fn hermitian_defect(a: &CMatrix) -> f64 {
    let scale = a.norm();
    let defect = (a - a.adjoint()).norm();
    if scale > 0.0 {
        defect / scale
    } else {
        defect
    }
}

pub fn symmetrize(a: &CMatrix) -> CMatrix {
    (a + a.adjoint()) * c(0.5)
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

/// Symmetrizes `a` if it is Hermitian within [`HERMITIAN_TOL`], rejects it otherwise.
pub fn require_hermitian(a: &CMatrix, what: &str) -> Result<CMatrix> {
    if !a.is_square() {
        return Err(EqError::invalid(format!("{what} is not square")));
    }
    let defect = hermitian_defect(a);
    if defect > HERMITIAN_TOL {
        return Err(EqError::invalid(format!(
            "{what} is not Hermitian (relative defect {defect:.3e})"
        )));
    }
    Ok(symmetrize(a))
}

/// Spectral decomposition of a Hermitian generator, used to apply the
/// one-parameter unitary group `exp(−iθA/ħ)` repeatedly at O(n²) per call.
#[derive(Debug, Clone)]
pub struct HermitianGenerator {
    eigenvalues: DVector<f64>,
    eigenvectors: CMatrix,
    hbar: f64,
}

impl HermitianGenerator {
    pub fn new(op: &CMatrix, hbar: f64) -> Result<Self> {
        if !(hbar > 0.0) {
            return Err(EqError::invalid("hbar must be positive"));
        }
        let h = require_hermitian(op, "generator")?;
        let eig = SymmetricEigen::new(h);
        Ok(Self {
            eigenvalues: eig.eigenvalues,
            eigenvectors: eig.eigenvectors,
            hbar,
        })
    }

    /// Wraps a known spectral decomposition `A = V diag(λ) V†`; `V` must be unitary.
    pub fn from_spectral(
        eigenvalues: DVector<f64>,
        eigenvectors: CMatrix,
        hbar: f64,
    ) -> Result<Self> {
        if eigenvectors.nrows() != eigenvalues.len() || !eigenvectors.is_square() {
            return Err(EqError::invalid("spectral data has inconsistent shape"));
        }
        if !(hbar > 0.0) {
            return Err(EqError::invalid("hbar must be positive"));
        }
        Ok(Self {
            eigenvalues,
            eigenvectors,
            hbar,
        })
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Reassembles `V diag(λ) V†`.
    pub fn matrix(&self) -> CMatrix {
        let mut scaled = self.eigenvectors.clone();
        for k in 0..self.dim() {
            let lam = self.eigenvalues[k];
            scaled.column_mut(k).scale_mut(lam);
        }
        scaled * self.eigenvectors.adjoint()
    }

    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eigenvalues
    }

    /// `exp(−iθA/ħ) v`.
    pub fn apply(&self, theta: f64, v: &CVector) -> CVector {
        let mut coeffs = self.eigenvectors.ad_mul(v);
        for (k, z) in coeffs.iter_mut().enumerate() {
            let phase = -theta * self.eigenvalues[k] / self.hbar;
            *z *= Complex64::from_polar(1.0, phase);
        }
        &self.eigenvectors * coeffs
    }

    /// The full unitary matrix `exp(−iθA/ħ)`.
    pub fn unitary(&self, theta: f64) -> CMatrix {
        let n = self.dim();
        let mut scaled = self.eigenvectors.clone();
        for k in 0..n {
            let phase = Complex64::from_polar(1.0, -theta * self.eigenvalues[k] / self.hbar);
            for r in 0..n {
                scaled[(r, k)] *= phase;
            }
        }
        scaled * self.eigenvectors.adjoint()
    }
}
