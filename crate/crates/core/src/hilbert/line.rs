//! Truncated Fock realization of the canonical pair on the real line.

use num_complex::Complex64;

use crate::error::{EqError, Result};
use crate::hilbert::StateVector;
use crate::linalg::{c, commutator, CMatrix, I};

/// `Q`, `P` and `D = (PQ + QP)/2` on the first `dim` oscillator levels.
///
/// `Q` and `P` carry units of `√ħ`, `D` units of `ħ`.
#[derive(Debug, Clone)]
pub struct LineRep {
    dim: usize,
    hbar: f64,
    q: CMatrix,
    p: CMatrix,
    d: CMatrix,
}

impl LineRep {
    pub fn new(dim: usize, hbar: f64) -> Result<Self> {
        if dim < 2 {
            return Err(EqError::invalid(format!(
                "Fock dimension must be >= 2, got {dim}"
            )));
        }
        if !(hbar > 0.0) || !hbar.is_finite() {
            return Err(EqError::invalid(format!(
                "hbar must be positive, got {hbar}"
            )));
        }
        let a = lowering(dim);
        let ad = a.adjoint();
        let s = (hbar / 2.0).sqrt();
        let q = (&a + &ad) * c(s);
        let p = (&ad - &a) * (I * s);
        let d = (&p * &q + &q * &p) * c(0.5);
        Ok(Self { dim, hbar, q, p, d })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn q(&self) -> &CMatrix {
        &self.q
    }

    pub fn p(&self) -> &CMatrix {
        &self.p
    }

    pub fn d(&self) -> &CMatrix {
        &self.d
    }

    pub fn lowering(&self) -> CMatrix {
        lowering(self.dim)
    }

    /// Oscillator ground state `|0⟩`, annihilated by `Q + iP`.
    pub fn vacuum(&self) -> StateVector {
        StateVector::basis(self.dim, 0).expect("dim >= 2")
    }

    /// Frobenius norm of `[Q,P] − iħ·1` restricted to the leading
    /// `dim − margin` levels.
    pub fn commutator_defect(&self, margin: usize) -> f64 {
        let keep = self.dim.saturating_sub(margin);
        let comm = commutator(&self.q, &self.p);
        let mut acc = 0.0;
        for i in 0..keep {
            for j in 0..keep {
                let target = if i == j { I * self.hbar } else { c(0.0) };
                acc += (comm[(i, j)] - target).norm_sqr();
            }
        }
        acc.sqrt()
    }

    /// `P² + Q² = ħ(2N + 1)` with exact (untruncated) matrix elements.
    pub fn oscillator_generator(&self) -> CMatrix {
        CMatrix::from_diagonal(&nalgebra::DVector::from_fn(self.dim, |n, _| {
            c(self.hbar * (2 * n + 1) as f64)
        }))
    }

    /// `PQ + QP = iħ(A†² − A²)` with exact (untruncated) matrix elements.
    pub fn squeeze_generator(&self) -> CMatrix {
        let mut g = CMatrix::zeros(self.dim, self.dim);
        for n in 2..self.dim {
            let amp = ((n * (n - 1)) as f64).sqrt() * self.hbar;
            // ⟨n|A†²|n−2⟩ = √(n(n−1))
            g[(n, n - 2)] = I * amp;
            g[(n - 2, n)] = -I * amp;
        }
        g
    }
}

/// Free-function constructor mirroring [`LineRep::new`].
pub fn build_fock_rep(dim: usize, hbar: f64) -> Result<LineRep> {
    LineRep::new(dim, hbar)
}

fn lowering(dim: usize) -> CMatrix {
    let mut a = CMatrix::zeros(dim, dim);
    for n in 1..dim {
        a[(n - 1, n)] = Complex64::new((n as f64).sqrt(), 0.0);
    }
    a
}
