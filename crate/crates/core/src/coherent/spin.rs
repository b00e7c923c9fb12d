//! Spin coherent states `|θ,φ⟩ = e^{−iφS3/ħ} e^{−iθS2/ħ} |s,s⟩` and the
//! `(p,q)` chart `p = √(sħ) cos θ`, `q = √(sħ) φ`.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{EqError, Result};
use crate::hilbert::{SpinRep, StateVector};
use crate::linalg::HermitianGenerator;

const RANGE_SLACK: f64 = 1e-12;

/// `(θ, φ) → (p, q)`.
pub fn angles_to_pq(theta: f64, phi: f64, s: f64, hbar: f64) -> Result<(f64, f64)> {
    check_angles(theta, phi)?;
    let r = (s * hbar).sqrt();
    Ok((r * theta.cos(), r * phi))
}

/// `(p, q) → (θ, φ)`; requires `p² ≤ sħ` and `−π√(sħ) < q ≤ π√(sħ)`.
pub fn pq_to_angles(p: f64, q: f64, s: f64, hbar: f64) -> Result<(f64, f64)> {
    let r = (s * hbar).sqrt();
    if !p.is_finite() || !q.is_finite() || p.abs() > r * (1.0 + RANGE_SLACK) {
        return Err(EqError::domain(format!(
            "spin label p = {p} outside [-{r}, {r}]"
        )));
    }
    let phi = q / r;
    if !(phi > -PI) || phi > PI * (1.0 + RANGE_SLACK) {
        return Err(EqError::domain(format!(
            "spin label q = {q} outside (-π√(sħ), π√(sħ)]"
        )));
    }
    Ok(((p / r).clamp(-1.0, 1.0).acos(), phi.min(PI)))
}

fn check_angles(theta: f64, phi: f64) -> Result<()> {
    if !(-RANGE_SLACK..=PI + RANGE_SLACK).contains(&theta) {
        return Err(EqError::domain(format!("theta = {theta} outside [0, π]")));
    }
    if !(phi > -PI) || phi > PI * (1.0 + RANGE_SLACK) {
        return Err(EqError::domain(format!("phi = {phi} outside (-π, π]")));
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct SpinFamily {
    rep: Arc<SpinRep>,
    tilt: Arc<HermitianGenerator>,
    turn: Arc<HermitianGenerator>,
}

impl SpinFamily {
    pub fn new(rep: Arc<SpinRep>) -> Result<Self> {
        let tilt = Arc::new(HermitianGenerator::new(rep.s2(), rep.hbar())?);
        let turn = Arc::new(HermitianGenerator::new(rep.s3(), rep.hbar())?);
        Ok(Self { rep, tilt, turn })
    }

    pub fn rep(&self) -> &SpinRep {
        &self.rep
    }

    pub fn s(&self) -> f64 {
        self.rep.s()
    }

    pub fn hbar(&self) -> f64 {
        self.rep.hbar()
    }

    /// Radius `√(sħ)` of the label sphere.
    pub fn radius(&self) -> f64 {
        (self.s() * self.hbar()).sqrt()
    }

    pub fn fiducial(&self) -> StateVector {
        self.rep.highest_weight()
    }

    /// `‖(S1 + iS2)|s,s⟩‖`.
    pub fn fiducial_residual(&self) -> f64 {
        (self.rep.raising() * self.fiducial().amplitudes()).norm()
    }

    pub fn state_angles(&self, theta: f64, phi: f64) -> Result<StateVector> {
        check_angles(theta, phi)?;
        let tilted = self.tilt.apply(theta, self.fiducial().amplitudes());
        Ok(StateVector::from_raw(self.turn.apply(phi, &tilted)))
    }

    pub fn state(&self, p: f64, q: f64) -> Result<StateVector> {
        let (theta, phi) = pq_to_angles(p, q, self.s(), self.hbar())?;
        self.state_angles(theta, phi)
    }
}

pub fn spin_cs(theta: f64, phi: f64, rep: &SpinRep) -> Result<StateVector> {
    SpinFamily::new(Arc::new(rep.clone()))?.state_angles(theta, phi)
}
