//! Extended coherent states
//! `|p,q,a,b⟩ = e^{−ia(P²+Q²)/ħ} e^{−ib(PQ+QP)/ħ} e^{−iqP/ħ} e^{ipQ/ħ} |0⟩`.
//!
//! The oscillator and squeeze generators use untruncated matrix elements
//! projected onto the Fock block.

use std::sync::Arc;

use crate::coherent::canonical::{canonical_cs, required_fock_dim, TRUNCATION_MARGIN};
use crate::error::{EqError, Result};
use crate::hilbert::{LineRep, StateVector};
use crate::linalg::HermitianGenerator;

/// Largest amplitude tolerated in the top `TRUNCATION_MARGIN` levels.
pub const EXTENDED_TAIL_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct ExtendedFamily {
    rep: Arc<LineRep>,
    a: f64,
    b: f64,
    rotation: Arc<HermitianGenerator>,
    squeeze: Arc<HermitianGenerator>,
}

impl ExtendedFamily {
    pub fn new(rep: Arc<LineRep>, a: f64, b: f64) -> Result<Self> {
        if !a.is_finite() || !b.is_finite() {
            return Err(EqError::invalid("extended parameters must be finite"));
        }
        let rotation = Arc::new(HermitianGenerator::new(
            &rep.oscillator_generator(),
            rep.hbar(),
        )?);
        let squeeze = Arc::new(HermitianGenerator::new(
            &rep.squeeze_generator(),
            rep.hbar(),
        )?);
        Ok(Self {
            rep,
            a,
            b,
            rotation,
            squeeze,
        })
    }

    pub fn rep(&self) -> &LineRep {
        &self.rep
    }

    pub fn hbar(&self) -> f64 {
        self.rep.hbar()
    }

    pub fn params(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    pub fn fiducial(&self) -> StateVector {
        self.rep.vacuum()
    }

    pub fn state(&self, p: f64, q: f64) -> Result<StateVector> {
        let base = canonical_cs(p, q, &self.rep)?;
        let squeezed = self.squeeze.apply(self.b, base.amplitudes());
        let rotated = self.rotation.apply(self.a, &squeezed);
        let dim = self.rep.dim();
        let top = dim.saturating_sub(TRUNCATION_MARGIN);
        let tail = rotated.rows(top, dim - top).norm();
        if tail > EXTENDED_TAIL_TOL {
            // squeezing stretches one quadrature by e^{2|b|}
            let stretch = (2.0 * self.b.abs()).exp();
            let needed = required_fock_dim(p * stretch, q * stretch, self.hbar())
                + (8.0 * (2.0 * self.b).sinh().powi(2)).ceil() as usize
                + TRUNCATION_MARGIN;
            return Err(EqError::Capacity {
                message: format!("extended state leaves amplitude {tail:.2e} in the top levels"),
                required_dim: needed.max(dim + 1),
            });
        }
        Ok(StateVector::from_raw(rotated))
    }
}

pub fn extended_cs(p: f64, q: f64, a: f64, b: f64, rep: &LineRep) -> Result<StateVector> {
    ExtendedFamily::new(Arc::new(rep.clone()), a, b)?.state(p, q)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduces_to_canonical() {
        let rep = LineRep::new(80, 1.0).unwrap();
        let e = extended_cs(0.7, -1.1, 0.0, 0.0, &rep).unwrap();
        let c = canonical_cs(0.7, -1.1, &rep).unwrap();
        assert!((e.amplitudes() - c.amplitudes()).norm() < 1e-13);
    }

    #[test]
    fn rotation_of_vacuum_is_a_phase() {
        let rep = LineRep::new(40, 1.0).unwrap();
        let e = extended_cs(0.0, 0.0, 0.37, 0.0, &rep).unwrap();
        assert!((e.overlap(&rep.vacuum()).unwrap().norm() - 1.0).abs() < 1e-13);
    }

    #[test]
    fn squeezed_vacuum_uncertainty() {
        let rep = LineRep::new(100, 1.0).unwrap();
        // pure squeeze: Q → e^{2b}Q, P → e^{−2b}P, still minimum uncertainty
        let e = extended_cs(0.0, 0.0, 0.0, 0.1, &rep).unwrap();
        let vq = e.variance(rep.q()).unwrap();
        let vp = e.variance(rep.p()).unwrap();
        assert!((vq - 0.5 * 0.4f64.exp()).abs() < 1e-10);
        assert!((vp - 0.5 * (-0.4f64).exp()).abs() < 1e-10);
        assert!((vq * vp - 0.25).abs() < 1e-10);
        // rotating the squeezed ellipse off the axes makes the product strictly larger
        let e = extended_cs(0.0, 0.0, 0.3, 0.1, &rep).unwrap();
        let prod = e.variance(rep.q()).unwrap() * e.variance(rep.p()).unwrap();
        assert!(prod > 0.25 + 1e-4, "{prod}");
    }

    #[test]
    fn capacity_error_when_over_squeezed() {
        let rep = LineRep::new(30, 1.0).unwrap();
        match extended_cs(2.0, 2.0, 0.0, 0.8, &rep) {
            Err(EqError::Capacity { required_dim, .. }) => assert!(required_dim > 30),
            other => panic!("expected capacity error, got {other:?}"),
        }
    }
}
