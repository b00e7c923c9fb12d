use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{EqError, Result};
use crate::linalg::{CMatrix, CVector};

/// Tolerance on `|‖ψ‖ − 1|` accepted by [`StateVector::from_amplitudes`].
pub const NORM_TOL: f64 = 1e-8;

/// A unit vector in the basis of some representation.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amplitudes: CVector,
}

impl StateVector {
    /// Wraps amplitudes that are already normalized.
    pub fn from_amplitudes(amplitudes: CVector) -> Result<Self> {
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(EqError::invalid(format!(
                "state norm {norm} differs from 1 by more than {NORM_TOL:e}"
            )));
        }
        Ok(Self { amplitudes })
    }

    /// Normalizes arbitrary nonzero amplitudes.
    pub fn normalized(amplitudes: CVector) -> Result<Self> {
        let norm = amplitudes.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(EqError::invalid(
                "cannot normalize a zero or non-finite vector",
            ));
        }
        Ok(Self {
            amplitudes: amplitudes.unscale(norm),
        })
    }

    /// Basis vector `|k⟩`.
    pub fn basis(dim: usize, k: usize) -> Result<Self> {
        if k >= dim {
            return Err(EqError::invalid(format!(
                "basis index {k} out of range for dim {dim}"
            )));
        }
        let mut v = CVector::zeros(dim);
        v[k] = Complex64::new(1.0, 0.0);
        Ok(Self { amplitudes: v })
    }

    pub(crate) fn from_raw(amplitudes: CVector) -> Self {
        Self { amplitudes }
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> CVector {
        self.amplitudes
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    /// `⟨self|other⟩`, antilinear in `self`.
    pub fn overlap(&self, other: &StateVector) -> Result<Complex64> {
        if self.dim() != other.dim() {
            return Err(dim_mismatch(self.dim(), other.dim()));
        }
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    /// `⟨ψ|A|ψ⟩`.
    pub fn expectation(&self, op: &CMatrix) -> Result<Complex64> {
        if op.nrows() != self.dim() || op.ncols() != self.dim() {
            return Err(dim_mismatch(self.dim(), op.nrows()));
        }
        Ok(self.amplitudes.dotc(&(op * &self.amplitudes)))
    }

    /// `⟨A²⟩ − ⟨A⟩²` for a Hermitian `A`, computed as `‖(A − ⟨A⟩)ψ‖²`.
    pub fn variance(&self, op: &CMatrix) -> Result<f64> {
        let mean = self.expectation(op)?.re;
        let applied = op * &self.amplitudes - self.amplitudes.scale(mean);
        Ok(applied.norm_squared())
    }

    /// Multiplies by a global phase `e^{iα}`.
    pub fn with_phase(&self, alpha: f64) -> StateVector {
        Self {
            amplitudes: self
                .amplitudes
                .map(|z| z * Complex64::from_polar(1.0, alpha)),
        }
    }
}

/// Free-function form of [`StateVector::expectation`].
pub fn expectation(state: &StateVector, op: &CMatrix) -> Result<Complex64> {
    state.expectation(op)
}

/// Free-function form of [`StateVector::overlap`].
pub fn overlap(a: &StateVector, b: &StateVector) -> Result<Complex64> {
    a.overlap(b)
}

fn dim_mismatch(a: usize, b: usize) -> EqError {
    EqError::invalid(format!("dimension mismatch: {a} vs {b}"))
}

/// Plain serializable snapshot of a state, `[re, im]` pairs.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct StateSnapshot {
    pub amplitudes: Vec<[f64; 2]>,
}

impl From<&StateVector> for StateSnapshot {
    fn from(s: &StateVector) -> Self {
        Self {
            amplitudes: s.amplitudes.iter().map(|z| [z.re, z.im]).collect(),
        }
    }
}
