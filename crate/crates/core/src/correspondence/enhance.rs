//! Enhanced Hamiltonians `H(p,q) = ⟨p,q|Ĥ|p,q⟩`.
//!
//! On the line and the half-line the shift identities
//! `P → P + p, Q → Q + q` (canonical) and `Q → qQ, D → D + pqQ,
//! P → P/q + p` (affine) turn each word into a Laurent polynomial in
//! `(p, q)` whose coefficients are fiducial moments, computed once.
//! Spin and extended families are evaluated by direct matrix expectation.

use std::collections::{BTreeMap, HashMap};
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::coherent::{CanonicalFamily, CoherentFamily, FamilyKind, StateMap};
use crate::correspondence::laurent::{LaurentPoly, Monomial};
use crate::correspondence::poly::{word_string, Letter, OperatorPolynomial, VariableSet, Word};
use crate::error::{EqError, Result};
use crate::hilbert::{LineRep, StateVector};
use crate::linalg::{CMatrix, CVector};

/// Largest tolerated `|Im H| / (1 + |H|)` for Hermitian polynomials.
pub const REALITY_TOL: f64 = 1e-10;

/// Real phase-space function with a gradient, the input of the integrators.
pub trait Hamiltonian: Send + Sync {
    fn value(&self, p: f64, q: f64) -> Result<f64>;
    /// `(∂H/∂p, ∂H/∂q)`.
    fn gradient(&self, p: f64, q: f64) -> Result<(f64, f64)>;
    fn domain(&self) -> LabelDomain;
    /// True when `H = T(p) + V(q)`.
    fn is_separable(&self) -> bool {
        false
    }
    /// Label-independent additive constant in `H` (zero-point shift).
    fn constant_shift(&self) -> f64 {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum LabelDomain {
    Plane,
    /// `q > 0`.
    HalfPlane,
    /// `|p| ≤ radius`, `q` an angle-like coordinate of period `2π·radius`.
    SphereChart {
        radius: f64,
    },
}

impl LabelDomain {
    pub fn contains(&self, p: f64, q: f64) -> bool {
        if !p.is_finite() || !q.is_finite() {
            return false;
        }
        match *self {
            LabelDomain::Plane => true,
            LabelDomain::HalfPlane => q > 0.0,
            LabelDomain::SphereChart { radius } => p.abs() <= radius,
        }
    }

    pub fn check(&self, p: f64, q: f64) -> Result<()> {
        if self.contains(p, q) {
            Ok(())
        } else {
            Err(EqError::domain(format!(
                "label ({p}, {q}) outside {self:?}"
            )))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Provenance {
    Expectation {
        polynomial: String,
        family: FamilyKind,
    },
    ClosedForm {
        expression: String,
    },
}

#[derive(Clone)]
enum Form {
    Laurent(LaurentPoly),
    Direct(Arc<DirectForm>),
}

struct DirectForm {
    family: CoherentFamily,
    poly: OperatorPolynomial,
}

#[derive(Clone)]
pub struct EnhancedHamiltonian {
    form: Form,
    provenance: Provenance,
    hbar: f64,
    domain: LabelDomain,
}

impl fmt::Debug for EnhancedHamiltonian {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut d = f.debug_struct("EnhancedHamiltonian");
        d.field("provenance", &self.provenance)
            .field("hbar", &self.hbar)
            .field("domain", &self.domain);
        if let Form::Laurent(l) = &self.form {
            d.field("laurent", &l.to_string());
        }
        d.finish()
    }
}

impl EnhancedHamiltonian {
    pub fn closed_form(
        expression: impl Into<String>,
        poly: LaurentPoly,
        hbar: f64,
        domain: LabelDomain,
    ) -> Self {
        Self {
            form: Form::Laurent(poly),
            provenance: Provenance::ClosedForm {
                expression: expression.into(),
            },
            hbar,
            domain,
        }
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    /// The Laurent-polynomial form, when the Hamiltonian has one.
    pub fn laurent(&self) -> Option<&LaurentPoly> {
        match &self.form {
            Form::Laurent(l) => Some(l),
            Form::Direct(_) => None,
        }
    }

    fn direct_value(&self, d: &DirectForm, p: f64, q: f64) -> Result<f64> {
        let (p, q) = match self.domain {
            LabelDomain::SphereChart { radius } => (p, wrap_angle(q, radius)),
            _ => (p, q),
        };
        let z = expectation_direct(&d.poly, &d.family, p, q)?;
        check_real(z)?;
        Ok(z.re)
    }
}

impl Hamiltonian for EnhancedHamiltonian {
    fn value(&self, p: f64, q: f64) -> Result<f64> {
        self.domain.check(p, q)?;
        match &self.form {
            Form::Laurent(l) => Ok(l.eval(p, q)),
            Form::Direct(d) => self.direct_value(d, p, q),
        }
    }

    fn gradient(&self, p: f64, q: f64) -> Result<(f64, f64)> {
        self.domain.check(p, q)?;
        match &self.form {
            Form::Laurent(l) => Ok(l.gradient(p, q)),
            Form::Direct(d) => {
                let scale = match self.domain {
                    LabelDomain::SphereChart { radius } => radius,
                    _ => 1.0,
                };
                let h = 1e-3 * scale;
                if let LabelDomain::SphereChart { radius } = self.domain {
                    if p.abs() + 2.0 * h >= radius {
                        return Err(EqError::domain(format!(
                            "gradient stencil at p = {p} crosses the chart pole"
                        )));
                    }
                }
                let f = |dp: f64, dq: f64| self.direct_value(d, p + dp, q + dq);
                let stencil = |g: &dyn Fn(f64) -> Result<f64>| -> Result<f64> {
                    Ok((g(-2.0 * h)? - 8.0 * g(-h)? + 8.0 * g(h)? - g(2.0 * h)?) / (12.0 * h))
                };
                let gp = stencil(&|x| f(x, 0.0))?;
                let gq = stencil(&|x| f(0.0, x))?;
                Ok((gp, gq))
            }
        }
    }

    fn domain(&self) -> LabelDomain {
        self.domain
    }

    fn is_separable(&self) -> bool {
        match &self.form {
            Form::Laurent(l) => l.is_separable(),
            Form::Direct(_) => false,
        }
    }

    fn constant_shift(&self) -> f64 {
        match &self.form {
            Form::Laurent(l) => l.coefficient(0, 0),
            Form::Direct(_) => 0.0,
        }
    }
}

fn wrap_angle(q: f64, radius: f64) -> f64 {
    let period = 2.0 * PI * radius;
    let mut x = (q + PI * radius).rem_euclid(period) - PI * radius;
    if x <= -PI * radius {
        x += period;
    }
    x
}

fn check_real(z: Complex64) -> Result<()> {
    if z.im.abs() > REALITY_TOL * (1.0 + z.re.abs()) {
        return Err(EqError::numerical(
            "expectation of a Hermitian polynomial has a sizeable imaginary part",
            vec![z.re, z.im],
        ));
    }
    Ok(())
}

fn letter_matrix(family: &CoherentFamily, letter: Letter) -> Result<&CMatrix> {
    let missing = || {
        EqError::invalid(format!(
            "operator {} is not available for the {:?} family",
            letter.name(),
            family.kind()
        ))
    };
    fn line(rep: &LineRep, letter: Letter) -> Option<&CMatrix> {
        match letter {
            Letter::P => Some(rep.p()),
            Letter::Q => Some(rep.q()),
            Letter::D => Some(rep.d()),
            _ => None,
        }
    }
    match family {
        CoherentFamily::Canonical(f) => line(f.rep(), letter).ok_or_else(missing),
        CoherentFamily::Extended(f) => line(f.rep(), letter).ok_or_else(missing),
        CoherentFamily::Affine(f) => {
            let rep = f.rep();
            match letter {
                Letter::P => Ok(rep.p_formal()),
                Letter::Q => Ok(rep.q()),
                Letter::D => Ok(rep.d()),
                _ => Err(missing()),
            }
        }
        CoherentFamily::Spin(f) => {
            let rep = f.rep();
            match letter {
                Letter::S1 => Ok(rep.s1()),
                Letter::S2 => Ok(rep.s2()),
                Letter::S3 => Ok(rep.s3()),
                _ => Err(missing()),
            }
        }
    }
}

fn apply_word<'a>(
    mats: &impl Fn(Letter) -> Result<&'a CMatrix>,
    word: &[Letter],
    v: &CVector,
) -> Result<CVector> {
    let mut out = v.clone();
    for &l in word.iter().rev() {
        out = mats(l)? * out;
    }
    Ok(out)
}

/// `Ĥ|ψ⟩` for a polynomial over the family's letters.
pub fn apply_polynomial(
    poly: &OperatorPolynomial,
    family: &CoherentFamily,
    v: &CVector,
) -> Result<CVector> {
    let mut acc = CVector::zeros(v.len());
    let mats = |l: Letter| letter_matrix(family, l);
    for (c, w) in poly.terms() {
        acc += apply_word(&mats, w, v)? * Complex64::from(c);
    }
    Ok(acc)
}

fn check_compatible(poly: &OperatorPolynomial, family: &CoherentFamily) -> Result<()> {
    let spin_family = family.kind() == FamilyKind::Spin;
    let spin_poly = poly.variable_set() == VariableSet::Spin;
    if spin_family != spin_poly && poly.letters().next().is_some() {
        return Err(EqError::invalid(format!(
            "polynomial over {:?} letters cannot be evaluated on the {:?} family",
            poly.variable_set(),
            family.kind()
        )));
    }
    Ok(())
}

/// `⟨p,q|Ĥ|p,q⟩` by building the state and multiplying matrices.
pub fn expectation_direct(
    poly: &OperatorPolynomial,
    family: &CoherentFamily,
    p: f64,
    q: f64,
) -> Result<Complex64> {
    check_compatible(poly, family)?;
    let psi = family.state(p, q)?;
    let hv = apply_polynomial(poly, family, psi.amplitudes())?;
    Ok(psi.amplitudes().dotc(&hv))
}

struct Choice {
    op: Option<Letter>,
    p_pow: i32,
    q_pow: i32,
}

fn canonical_rule(l: Letter) -> Vec<Choice> {
    match l {
        Letter::P => vec![
            Choice {
                op: Some(Letter::P),
                p_pow: 0,
                q_pow: 0,
            },
            Choice {
                op: None,
                p_pow: 1,
                q_pow: 0,
            },
        ],
        Letter::Q => vec![
            Choice {
                op: Some(Letter::Q),
                p_pow: 0,
                q_pow: 0,
            },
            Choice {
                op: None,
                p_pow: 0,
                q_pow: 1,
            },
        ],
        _ => unreachable!("D is expanded before shifting"),
    }
}

fn affine_rule(l: Letter) -> Vec<Choice> {
    match l {
        Letter::Q => vec![Choice {
            op: Some(Letter::Q),
            p_pow: 0,
            q_pow: 1,
        }],
        Letter::D => vec![
            Choice {
                op: Some(Letter::D),
                p_pow: 0,
                q_pow: 0,
            },
            Choice {
                op: Some(Letter::Q),
                p_pow: 1,
                q_pow: 1,
            },
        ],
        Letter::P => vec![
            Choice {
                op: Some(Letter::P),
                p_pow: 0,
                q_pow: -1,
            },
            Choice {
                op: None,
                p_pow: 1,
                q_pow: 0,
            },
        ],
        _ => unreachable!("spin letters are rejected before shifting"),
    }
}

/// Expands every word through a shift rule into `(coef, fiducial word, p-power, q-power)`.
fn shift_expand(
    terms: &[(f64, Word)],
    rule: fn(Letter) -> Vec<Choice>,
) -> Vec<(f64, Word, i32, i32)> {
    let mut out = Vec::new();
    for (c, w) in terms {
        let mut acc: Vec<(Word, i32, i32)> = vec![(Word::new(), 0, 0)];
        for &l in w {
            let choices = rule(l);
            acc = acc
                .into_iter()
                .flat_map(|(word, a, b)| {
                    choices.iter().map(move |ch| {
                        let mut nw = word.clone();
                        nw.extend(ch.op);
                        (nw, a + ch.p_pow, b + ch.q_pow)
                    })
                })
                .collect();
        }
        out.extend(acc.into_iter().map(|(word, a, b)| (*c, word, a, b)));
    }
    out
}

/// Rewrites `D` as `(PQ + QP)/2`.
fn expand_dilations(poly: &OperatorPolynomial) -> Vec<(f64, Word)> {
    let mut out = Vec::new();
    for (c, w) in poly.terms() {
        let mut acc: Vec<(f64, Word)> = vec![(c, Word::new())];
        for &l in w {
            acc = acc
                .into_iter()
                .flat_map(|(c, word)| {
                    let opts: Vec<(f64, Vec<Letter>)> = if l == Letter::D {
                        vec![
                            (0.5, vec![Letter::P, Letter::Q]),
                            (0.5, vec![Letter::Q, Letter::P]),
                        ]
                    } else {
                        vec![(1.0, vec![l])]
                    };
                    opts.into_iter().map(move |(f, ext)| {
                        let mut nw = word.clone();
                        nw.extend(ext);
                        (c * f, nw)
                    })
                })
                .collect();
        }
        out.extend(acc);
    }
    out
}

/// Collapses expanded terms against fiducial moments into a Laurent polynomial.
fn assemble(
    expanded: &[(f64, Word, i32, i32)],
    moment: &mut dyn FnMut(&Word) -> Result<Complex64>,
) -> Result<LaurentPoly> {
    let mut cache: HashMap<Word, Complex64> = HashMap::new();
    let mut acc: BTreeMap<(i32, i32), Complex64> = BTreeMap::new();
    for (c, w, a, b) in expanded {
        let m = match cache.get(w) {
            Some(m) => *m,
            None => {
                let m = moment(w)?;
                cache.insert(w.clone(), m);
                m
            }
        };
        *acc.entry((*a, *b)).or_insert(Complex64::new(0.0, 0.0)) += m * *c;
    }
    let scale = acc.values().fold(0.0_f64, |s, z| s.max(z.re.abs()));
    for z in acc.values() {
        if z.im.abs() > REALITY_TOL * (1.0 + scale) {
            return Err(EqError::numerical(
                "shift expansion left an imaginary coefficient",
                vec![z.re, z.im],
            ));
        }
    }
    Ok(
        LaurentPoly::new(acc.into_iter().map(|((p_pow, q_pow), z)| Monomial {
            coef: z.re,
            p_pow,
            q_pow,
        }))
        .pruned(1e-14),
    )
}

/// Near `x = 0` the fiducial behaves like `x^{a−1/2}`; every vector built
/// while evaluating a formal `P`-word must stay square integrable there.
fn check_fiducial_finite(word: &[Letter], a: f64) -> Result<()> {
    let half = word.len() / 2;
    let (left, right) = word.split_at(half);
    let halves: [Vec<Letter>; 2] = [right.to_vec(), left.iter().rev().copied().collect()];
    for h in &halves {
        let mut lift = 0i32;
        for &l in h.iter().rev() {
            match l {
                Letter::P => lift -= 1,
                Letter::Q => lift += 1,
                _ => {}
            }
            if a + lift as f64 <= 0.0 {
                return Err(EqError::domain(format!(
                    "fiducial moment of {} diverges at x = 0 for beta/hbar = {a}",
                    word_string(word)
                )));
            }
        }
    }
    Ok(())
}

/// `H(p,q) = ⟨p,q|poly|p,q⟩` for the given family.
pub fn enhance(poly: &OperatorPolynomial, family: &CoherentFamily) -> Result<EnhancedHamiltonian> {
    check_compatible(poly, family)?;
    let hbar = family.hbar();
    let provenance = Provenance::Expectation {
        polynomial: poly.to_string(),
        family: family.kind(),
    };
    let (form, domain) = match family {
        CoherentFamily::Canonical(_) => {
            let expanded = shift_expand(&expand_dilations(poly), canonical_rule);
            let rep = LineRep::new(poly.max_word_len().max(1) * 2 + 4, hbar)?;
            let vac = rep.vacuum();
            let mats = |l: Letter| -> Result<&CMatrix> {
                Ok(match l {
                    Letter::P => rep.p(),
                    _ => rep.q(),
                })
            };
            let mut moment = |w: &Word| fiducial_moment(&mats, w, &vac);
            (
                Form::Laurent(assemble(&expanded, &mut moment)?),
                LabelDomain::Plane,
            )
        }
        CoherentFamily::Affine(f) => {
            let terms: Vec<(f64, Word)> = poly.terms().map(|(c, w)| (c, w.clone())).collect();
            let expanded = shift_expand(&terms, affine_rule);
            let a = f.beta() / hbar;
            for (_, w, _, _) in &expanded {
                check_fiducial_finite(w, a)?;
            }
            let mats = |l: Letter| letter_matrix(family, l);
            let fid = f.fiducial().clone();
            let mut moment = |w: &Word| fiducial_moment(&mats, w, &fid);
            (
                Form::Laurent(assemble(&expanded, &mut moment)?),
                LabelDomain::HalfPlane,
            )
        }
        CoherentFamily::Spin(f) => (
            Form::Direct(Arc::new(DirectForm {
                family: family.clone(),
                poly: poly.clone(),
            })),
            LabelDomain::SphereChart { radius: f.radius() },
        ),
        CoherentFamily::Extended(_) => (
            Form::Direct(Arc::new(DirectForm {
                family: family.clone(),
                poly: poly.clone(),
            })),
            LabelDomain::Plane,
        ),
    };
    Ok(EnhancedHamiltonian {
        form,
        provenance,
        hbar,
        domain,
    })
}

fn fiducial_moment<'a>(
    mats: &impl Fn(Letter) -> Result<&'a CMatrix>,
    w: &[Letter],
    fid: &StateVector,
) -> Result<Complex64> {
    let v = apply_word(mats, w, fid.amplitudes())?;
    Ok(fid.amplitudes().dotc(&v))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ShiftSample {
    pub p: f64,
    pub q: f64,
    /// `⟨p,q|Ĥ|p,q⟩` from the state vector.
    pub direct: f64,
    /// `⟨0|Ĥ(P+p, Q+q)|0⟩` from the cached vacuum moments.
    pub shifted: f64,
    pub deviation: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ShiftReport {
    pub polynomial: String,
    pub samples: Vec<ShiftSample>,
    pub max_deviation: f64,
}

/// Compares the direct expectation with the shifted-vacuum route.
pub fn shift_identity_check(
    poly: &OperatorPolynomial,
    family: &CanonicalFamily,
    samples: &[(f64, f64)],
) -> Result<ShiftReport> {
    let fam = CoherentFamily::from(family.clone());
    let h = enhance(poly, &fam)?;
    let mut out = Vec::with_capacity(samples.len());
    let mut max_deviation = 0.0_f64;
    for &(p, q) in samples {
        let direct = expectation_direct(poly, &fam, p, q)?;
        check_real(direct)?;
        let shifted = h.value(p, q)?;
        let deviation = (direct.re - shifted).abs();
        max_deviation = max_deviation.max(deviation);
        out.push(ShiftSample {
            p,
            q,
            direct: direct.re,
            shifted,
            deviation,
        });
    }
    Ok(ShiftReport {
        polynomial: poly.to_string(),
        samples: out,
        max_deviation,
    })
}
