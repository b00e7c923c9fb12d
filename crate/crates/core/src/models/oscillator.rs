//! Harmonic oscillator `P²/2m + mω²Q²/2` in canonical coherent states.

use crate::correspondence::{EnhancedHamiltonian, LabelDomain, LaurentPoly};
use crate::error::{EqError, Result};

/// `p²/2m + mω²q²/2 + (ħ/4)(1/m + mω²)`.
pub fn harmonic_oscillator(m: f64, omega: f64, hbar: f64) -> Result<EnhancedHamiltonian> {
    for (name, v) in [("m", m), ("omega", omega), ("hbar", hbar)] {
        if !(v > 0.0) || !v.is_finite() {
            return Err(EqError::invalid(format!(
                "{name} must be positive, got {v}"
            )));
        }
    }
    let k = m * omega * omega;
    Ok(EnhancedHamiltonian::closed_form(
        format!(
            "p^2/(2*{m:?}) + {k:?}*q^2/2 + {:?}",
            0.25 * hbar * (1.0 / m + k)
        ),
        LaurentPoly::from_triples(&[
            (0.5 / m, 2, 0),
            (0.5 * k, 0, 2),
            (0.25 * hbar * (1.0 / m + k), 0, 0),
        ]),
        hbar,
        LabelDomain::Plane,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coherent::{CoherentFamily, FamilyParams};
    use crate::correspondence::{enhance, Hamiltonian, OperatorPolynomial};

    #[test]
    fn matches_expectation_route() {
        for (m, omega, hbar) in [(1.0, 1.0, 1.0), (2.0, 0.5, 0.3)] {
            let closed = harmonic_oscillator(m, omega, hbar).unwrap();
            let poly = OperatorPolynomial::parse(&format!(
                "{:?}*P^2 + {:?}*Q^2",
                0.5 / m,
                0.5 * m * omega * omega
            ))
            .unwrap();
            let fam = CoherentFamily::build(FamilyParams::Canonical { hbar }, 20).unwrap();
            let h = enhance(&poly, &fam).unwrap();
            for &(p, q) in &[(0.0, 1.0), (1.5, -0.3)] {
                assert!((closed.value(p, q).unwrap() - h.value(p, q).unwrap()).abs() < 1e-12);
            }
        }
        let h = harmonic_oscillator(1.0, 1.0, 1.0).unwrap();
        assert_eq!(h.constant_shift(), 0.5);
        assert!(harmonic_oscillator(0.0, 1.0, 1.0).is_err());
    }
}
