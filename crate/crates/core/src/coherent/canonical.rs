use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{EqError, Result};
use crate::hilbert::{LineRep, StateVector};
use crate::linalg::{CVector, I};

/// Levels at the top of the Fock basis that must stay empty.
pub const TRUNCATION_MARGIN: usize = 20;
/// Largest amplitude tolerated beyond level `dim − TRUNCATION_MARGIN`.
pub const TRUNCATION_TOL: f64 = 1e-12;

/// Canonical coherent states `|p,q⟩ = e^{−iqP/ħ} e^{ipQ/ħ} |0⟩`.
#[derive(Debug, Clone)]
pub struct CanonicalFamily {
    rep: Arc<LineRep>,
}

impl CanonicalFamily {
    pub fn new(rep: Arc<LineRep>) -> Self {
        Self { rep }
    }

    /// Family whose Fock basis is adequate for every label with
    /// `p² + q² ≤ radius²`.
    pub fn for_radius(hbar: f64, radius: f64) -> Result<Self> {
        let dim = required_fock_dim(radius, 0.0, hbar).max(32);
        Ok(Self::new(Arc::new(LineRep::new(dim, hbar)?)))
    }

    pub fn rep(&self) -> &LineRep {
        &self.rep
    }

    pub fn rep_arc(&self) -> Arc<LineRep> {
        Arc::clone(&self.rep)
    }

    pub fn hbar(&self) -> f64 {
        self.rep.hbar()
    }

    pub fn fiducial(&self) -> StateVector {
        self.rep.vacuum()
    }

    /// `‖(Q + iP)|0⟩‖`.
    pub fn fiducial_residual(&self) -> f64 {
        let v = (self.rep.q() + self.rep.p() * I) * self.fiducial().amplitudes();
        v.norm()
    }

    pub fn state(&self, p: f64, q: f64) -> Result<StateVector> {
        canonical_cs(p, q, &self.rep)
    }
}

/// `|α|²` of the displaced vacuum with `α = (q + ip)/√(2ħ)`.
fn mean_occupation(p: f64, q: f64, hbar: f64) -> f64 {
    (p * p + q * q) / (2.0 * hbar)
}

/// `ln(λⁿ e^{−λ}/n!)`.
fn ln_poisson(n: usize, lambda: f64, ln_fact: f64) -> f64 {
    if lambda == 0.0 {
        return if n == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    n as f64 * lambda.ln() - lambda - ln_fact
}

/// Amplitude `(Σ_{n ≥ level} |⟨n|p,q⟩|²)^{1/2}` carried at or above `level`.
pub fn tail_amplitude(p: f64, q: f64, hbar: f64, level: usize) -> f64 {
    let lambda = mean_occupation(p, q, hbar);
    let mut ln_fact = 0.0;
    for k in 1..=level {
        ln_fact += (k as f64).ln();
    }
    let mut mass = 0.0;
    let mut n = level;
    loop {
        let term = ln_poisson(n, lambda, ln_fact).exp();
        mass += term;
        // past the mode the terms fall off geometrically
        if n as f64 > lambda && term <= mass * 1e-18 {
            break;
        }
        if term == 0.0 && n as f64 > lambda {
            break;
        }
        n += 1;
        ln_fact += (n as f64).ln();
        if n > level + 100_000 {
            break;
        }
    }
    mass.sqrt()
}

/// Smallest Fock dimension for which `|p,q⟩` passes the truncation check.
pub fn required_fock_dim(p: f64, q: f64, hbar: f64) -> usize {
    let lambda = mean_occupation(p, q, hbar);
    let mut level = lambda.floor() as usize;
    while tail_amplitude(p, q, hbar, level) >= TRUNCATION_TOL {
        level += 1 + level / 16;
    }
    // step back to the tightest adequate level
    while level > 0 && tail_amplitude(p, q, hbar, level - 1) < TRUNCATION_TOL {
        level -= 1;
    }
    (level + TRUNCATION_MARGIN).max(2)
}

/// `e^{−iqP/ħ} e^{ipQ/ħ} |0⟩` expanded in the Fock basis:
/// `e^{−ipq/2ħ} e^{−|α|²/2} Σ αⁿ/√n! |n⟩`, `α = (q + ip)/√(2ħ)`.
pub fn canonical_cs(p: f64, q: f64, rep: &LineRep) -> Result<StateVector> {
    if !p.is_finite() || !q.is_finite() {
        return Err(EqError::domain("canonical labels must be finite"));
    }
    let hbar = rep.hbar();
    let dim = rep.dim();
    let level = dim.saturating_sub(TRUNCATION_MARGIN);
    let tail = tail_amplitude(p, q, hbar, level);
    if tail >= TRUNCATION_TOL {
        return Err(EqError::Capacity {
            message: format!(
                "coherent state ({p}, {q}) leaves amplitude {tail:.2e} above level {level}"
            ),
            required_dim: required_fock_dim(p, q, hbar),
        });
    }
    let alpha = Complex64::new(q, p) / (2.0 * hbar).sqrt();
    let lambda = alpha.norm_sqr();
    let (ln_abs, arg) = (alpha.norm().ln(), alpha.arg());
    let global = -p * q / (2.0 * hbar);
    let mut ln_fact = 0.0;
    let amps = CVector::from_fn(dim, |n, _| {
        if n > 0 {
            ln_fact += 0.5 * (n as f64).ln();
        }
        if lambda == 0.0 {
            return if n == 0 {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            };
        }
        let ln_mag = -0.5 * lambda + n as f64 * ln_abs - ln_fact;
        Complex64::from_polar(ln_mag.exp(), global + n as f64 * arg)
    });
    Ok(StateVector::from_raw(amps))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::apply_unitary;

    #[test]
    fn origin_is_fiducial() {
        let rep = LineRep::new(40, 1.0).unwrap();
        let s = canonical_cs(0.0, 0.0, &rep).unwrap();
        assert_eq!(s, rep.vacuum());
    }

    #[test]
    fn matches_product_of_exponentials() {
        // oracle: exponentiate the truncated generators directly
        let rep = LineRep::new(120, 1.0).unwrap();
        for &(p, q) in &[(1.0, 2.0), (-0.7, 0.3), (2.5, -1.5)] {
            let v = apply_unitary(rep.q(), -p, 1.0, &rep.vacuum()).unwrap();
            let u = apply_unitary(rep.p(), q, 1.0, &v).unwrap();
            let s = canonical_cs(p, q, &rep).unwrap();
            assert!(
                (u.amplitudes() - s.amplitudes()).norm() < 1e-10,
                "({p},{q})"
            );
        }
    }

    #[test]
    fn label_means_and_variances() {
        let rep = LineRep::new(200, 1.0).unwrap();
        let s = canonical_cs(1.0, 2.0, &rep).unwrap();
        assert!((s.expectation(rep.q()).unwrap().re - 2.0).abs() < 1e-8);
        assert!((s.expectation(rep.p()).unwrap().re - 1.0).abs() < 1e-8);
        assert!((s.variance(rep.q()).unwrap() - 0.5).abs() < 1e-8);
        assert!((s.variance(rep.p()).unwrap() - 0.5).abs() < 1e-8);
    }

    #[test]
    fn gaussian_overlap_with_vacuum() {
        let hbar = 0.6;
        let rep = LineRep::new(150, hbar).unwrap();
        let vac = rep.vacuum();
        for &(p, q) in &[(0.5, 0.5), (1.0, -2.0), (0.0, 1.7)] {
            let s = canonical_cs(p, q, &rep).unwrap();
            let ov = vac.overlap(&s).unwrap().norm_sqr();
            let expected = (-(p * p + q * q) / (2.0 * hbar)).exp();
            assert!((ov - expected).abs() < 1e-13);
        }
    }

    #[test]
    fn capacity_error_reports_required_dim() {
        let rep = LineRep::new(30, 1.0).unwrap();
        match canonical_cs(4.0, 4.0, &rep) {
            Err(EqError::Capacity { required_dim, .. }) => {
                assert!(required_dim > 30);
                let big = LineRep::new(required_dim, 1.0).unwrap();
                assert!(canonical_cs(4.0, 4.0, &big).is_ok());
                let small = LineRep::new(required_dim - 1, 1.0).unwrap();
                assert!(canonical_cs(4.0, 4.0, &small).is_err());
            }
            other => panic!("expected capacity error, got {other:?}"),
        }
    }

    #[test]
    fn fiducial_is_annihilated() {
        let fam = CanonicalFamily::new(Arc::new(LineRep::new(50, 2.0).unwrap()));
        assert!(fam.fiducial_residual() < 1e-14);
    }
}
