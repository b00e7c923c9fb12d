use crate::error::{EqError, Result};
use crate::hilbert::StateVector;
use crate::linalg::{c, CMatrix, I};

/// Irreducible spin-`s` representation, basis ordered by descending `m`
/// (index `k` holds `|s, s − k⟩`).
#[derive(Debug, Clone)]
pub struct SpinRep {
    twice_s: u32,
    hbar: f64,
    s1: CMatrix,
    s2: CMatrix,
    s3: CMatrix,
}

impl SpinRep {
    pub fn new(s: f64, hbar: f64) -> Result<Self> {
        let twice = 2.0 * s;
        if !(twice >= 1.0) || (twice - twice.round()).abs() > 1e-12 || !twice.is_finite() {
            return Err(EqError::invalid(format!(
                "spin must be a positive half-integer, got {s}"
            )));
        }
        if !(hbar > 0.0) || !hbar.is_finite() {
            return Err(EqError::invalid(format!(
                "hbar must be positive, got {hbar}"
            )));
        }
        let twice_s = twice.round() as u32;
        let s = twice_s as f64 / 2.0;
        let dim = twice_s as usize + 1;
        let m_of = |k: usize| s - k as f64;

        // S+ |s,m⟩ = ħ√(s(s+1) − m(m+1)) |s,m+1⟩
        let mut raise = CMatrix::zeros(dim, dim);
        for k in 1..dim {
            let m = m_of(k);
            raise[(k - 1, k)] = c(hbar * (s * (s + 1.0) - m * (m + 1.0)).sqrt());
        }
        let lower = raise.adjoint();
        let s1 = (&raise + &lower) * c(0.5);
        let s2 = (&raise - &lower) * (-I * 0.5);
        let s3 = CMatrix::from_diagonal(&nalgebra::DVector::from_fn(dim, |k, _| c(hbar * m_of(k))));
        Ok(Self {
            twice_s,
            hbar,
            s1,
            s2,
            s3,
        })
    }

    pub fn s(&self) -> f64 {
        self.twice_s as f64 / 2.0
    }

    pub fn dim(&self) -> usize {
        self.twice_s as usize + 1
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn s1(&self) -> &CMatrix {
        &self.s1
    }

    pub fn s2(&self) -> &CMatrix {
        &self.s2
    }

    pub fn s3(&self) -> &CMatrix {
        &self.s3
    }

    /// `S1 + iS2`.
    pub fn raising(&self) -> CMatrix {
        &self.s1 + &self.s2 * I
    }

    /// Highest-weight vector `|s, s⟩`.
    pub fn highest_weight(&self) -> StateVector {
        StateVector::basis(self.dim(), 0).expect("dim >= 2")
    }

    /// `|s, m⟩` for `m ∈ {−s, …, s}`.
    pub fn basis_state(&self, m: f64) -> Result<StateVector> {
        let k = self.s() - m;
        if (k - k.round()).abs() > 1e-12 || k < -1e-12 || k.round() as usize >= self.dim() {
            return Err(EqError::invalid(format!(
                "m = {m} not in spin-{} multiplet",
                self.s()
            )));
        }
        StateVector::basis(self.dim(), k.round() as usize)
    }

    /// `S1² + S2² + S3²`.
    pub fn casimir(&self) -> CMatrix {
        &self.s1 * &self.s1 + &self.s2 * &self.s2 + &self.s3 * &self.s3
    }
}

pub fn build_spin_rep(s: f64, hbar: f64) -> Result<SpinRep> {
    SpinRep::new(s, hbar)
}
