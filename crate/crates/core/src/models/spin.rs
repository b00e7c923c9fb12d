//! Spin in a field along the 3-axis: `H = B·S3`.

use std::sync::Arc;

use crate::coherent::{CoherentFamily, SpinFamily};
use crate::correspondence::{
    enhance, EnhancedHamiltonian, LabelDomain, LaurentPoly, OperatorPolynomial,
};
use crate::error::{EqError, Result};
use crate::hilbert::SpinRep;

/// `⟨p,q|B·S3|p,q⟩ = B√(sħ)·p` on the sphere chart of radius `√(sħ)`.
pub fn spin_precession(b: f64, s: f64, hbar: f64) -> Result<EnhancedHamiltonian> {
    if !b.is_finite() {
        return Err(EqError::invalid("field strength must be finite"));
    }
    // validates s and ħ
    SpinRep::new(s, hbar)?;
    let r = (s * hbar).sqrt();
    Ok(EnhancedHamiltonian::closed_form(
        format!("{b:?}*sqrt({s:?}*{hbar:?})*p"),
        LaurentPoly::from_triples(&[(b * r, 1, 0)]),
        hbar,
        LabelDomain::SphereChart { radius: r },
    ))
}

/// Same Hamiltonian through the spin matrices.
pub fn spin_precession_expectation(b: f64, s: f64, hbar: f64) -> Result<EnhancedHamiltonian> {
    let fam = CoherentFamily::from(SpinFamily::new(Arc::new(SpinRep::new(s, hbar)?))?);
    enhance(&OperatorPolynomial::parse(&format!("{b:?}*S3"))?, &fam)
}
