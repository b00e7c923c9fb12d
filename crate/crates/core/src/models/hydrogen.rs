//! One-dimensional hydrogen: `H_c = p²/2m − e²/q` on `q > 0` and its affine
//! enhancement `p²/2m − C₁/q + C₂/(2mq²)`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::coherent::{AffineFamily, CoherentFamily};
use crate::correspondence::{
    enhance, EnhancedHamiltonian, Hamiltonian, LabelDomain, LaurentPoly, OperatorPolynomial,
};
use crate::error::{EqError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HydrogenParams {
    pub m: f64,
    pub e2: f64,
    pub beta: f64,
    pub hbar: f64,
}

impl Default for HydrogenParams {
    fn default() -> Self {
        Self {
            m: 1.0,
            e2: 1.0,
            beta: 2.0,
            hbar: 1.0,
        }
    }
}

impl HydrogenParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("m", self.m),
            ("e2", self.e2),
            ("beta", self.beta),
            ("hbar", self.hbar),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(EqError::invalid(format!(
                    "hydrogen parameter {name} must be positive, got {v}"
                )));
            }
        }
        if !(self.beta > self.hbar) {
            return Err(EqError::domain(format!(
                "beta = {} must exceed hbar = {} for a finite C2",
                self.beta, self.hbar
            )));
        }
        Ok(())
    }
}

/// Enhanced hydrogen with its constants measured on the affine fiducial.
#[derive(Debug, Clone)]
pub struct HydrogenModel {
    params: HydrogenParams,
    family: Arc<AffineFamily>,
    c1: f64,
    c2: f64,
}

impl HydrogenModel {
    pub fn new(params: HydrogenParams) -> Result<Self> {
        params.validate()?;
        let family = AffineFamily::with_auto_grid(params.beta, params.hbar)?;
        let c1 = params.e2 * family.inverse_moment();
        let c2 = family.c2();
        Ok(Self {
            params,
            family: Arc::new(family),
            c1,
            c2,
        })
    }

    pub fn params(&self) -> &HydrogenParams {
        &self.params
    }

    pub fn family(&self) -> &AffineFamily {
        &self.family
    }

    /// `C₁ = e²⟨β|Q⁻¹|β⟩`.
    pub fn c1(&self) -> f64 {
        self.c1
    }

    /// `C₂ = ⟨β|P²|β⟩`.
    pub fn c2(&self) -> f64 {
        self.c2
    }

    pub fn classical(&self) -> EnhancedHamiltonian {
        classical_form(&self.params)
    }

    pub fn enhanced(&self) -> EnhancedHamiltonian {
        let m = self.params.m;
        EnhancedHamiltonian::closed_form(
            format!(
                "p^2/(2*{m:?}) - {:?}/q + {:?}/(2*{m:?}*q^2)",
                self.c1, self.c2
            ),
            LaurentPoly::from_triples(&[
                (0.5 / m, 2, 0),
                (-self.c1, 0, -1),
                (0.5 * self.c2 / m, 0, -2),
            ]),
            self.params.hbar,
            LabelDomain::HalfPlane,
        )
    }

    /// `(C₂/2m) / (ħ²C₁/(me²))`; one when the enhancement length is the Bohr radius.
    pub fn bohr_ratio(&self) -> f64 {
        let HydrogenParams { m, e2, hbar, .. } = self.params;
        (self.c2 / (2.0 * m)) / (hbar * hbar * self.c1 / (m * e2))
    }

    /// The enhanced Hamiltonian by expectation: the kinetic term through
    /// `enhance(P²/2m)` and the Coulomb term as the diagonal grid sum
    /// `e²⟨p,q|Q⁻¹|p,q⟩` over the dilated fiducial.
    pub fn expectation_value(&self, p: f64, q: f64) -> Result<f64> {
        let kinetic = OperatorPolynomial::parse(&format!("{:?}*P^2", 0.5 / self.params.m))?;
        let fam = CoherentFamily::Affine((*self.family).clone());
        let t = enhance(&kinetic, &fam)?.value(p, q)?;
        let psi = self.family.dilated_fiducial(q)?;
        let inv: f64 = self
            .family
            .rep()
            .grid()
            .points()
            .iter()
            .zip(psi.amplitudes().iter())
            .map(|(x, z)| z.norm_sqr() / x)
            .sum();
        Ok(t - self.params.e2 * inv)
    }
}

fn classical_form(params: &HydrogenParams) -> EnhancedHamiltonian {
    let HydrogenParams { m, e2, hbar, .. } = *params;
    EnhancedHamiltonian::closed_form(
        format!("p^2/(2*{m:?}) - {e2:?}/q"),
        LaurentPoly::from_triples(&[(0.5 / m, 2, 0), (-e2, 0, -1)]),
        hbar,
        LabelDomain::HalfPlane,
    )
}

pub fn hydrogen_classical(params: &HydrogenParams) -> Result<EnhancedHamiltonian> {
    params.validate()?;
    Ok(classical_form(params))
}

pub fn hydrogen_enhanced(params: &HydrogenParams) -> Result<EnhancedHamiltonian> {
    Ok(HydrogenModel::new(*params)?.enhanced())
}

/// Inner turning point at `p = 0`: the smallest positive root of
/// `E = −C₁/q + C₂/(2mq²)`, read off the Hamiltonian's Laurent form.
pub fn min_radius(h: &EnhancedHamiltonian, energy: f64) -> Result<f64> {
    let l = h
        .laurent()
        .ok_or_else(|| EqError::invalid("min_radius needs a closed-form hydrogen Hamiltonian"))?;
    let allowed = |t: &crate::correspondence::Monomial| {
        matches!((t.p_pow, t.q_pow), (2, 0) | (0, -1) | (0, -2) | (0, 0))
    };
    if !l.terms().iter().all(allowed) {
        return Err(EqError::invalid(format!(
            "not a hydrogen-type Hamiltonian: {l}"
        )));
    }
    // E' q² + b q − a = 0 with a = C₂/2m, b = C₁
    let a = l.coefficient(0, -2);
    let b = -l.coefficient(0, -1);
    let e = energy - l.coefficient(0, 0);
    if !(a > 0.0) || !(b > 0.0) {
        return Err(EqError::invalid(
            "no inner turning point without a positive repulsive q^-2 term and attractive q^-1 term",
        ));
    }
    let floor = -b * b / (4.0 * a);
    let mut disc = b * b + 4.0 * e * a;
    if disc < 0.0 {
        if e >= floor * (1.0 + 1e-12) {
            disc = 0.0;
        } else {
            return Err(EqError::invalid(format!(
                "energy {energy} lies below the potential minimum {}",
                floor + l.coefficient(0, 0)
            )));
        }
    }
    let mut q = 2.0 * a / (b + disc.sqrt());
    // Newton polish on f(q) = a/q² − b/q − e, skipped at the double root
    for _ in 0..3 {
        let f = a / (q * q) - b / q - e;
        let df = -2.0 * a / (q * q * q) + b / (q * q);
        if df.abs() < 1e-8 * (a / (q * q * q)) {
            break;
        }
        let next = q - f / df;
        if !(next > 0.0) {
            break;
        }
        q = next;
    }
    Ok(q)
}

/// `H(0, q)`, the effective potential.
pub fn effective_potential(h: &EnhancedHamiltonian, q: f64) -> Result<f64> {
    h.value(0.0, q)
}
