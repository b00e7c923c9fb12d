//! Real Laurent polynomials `Σ c·p^a·q^b` with integer (possibly negative)
//! exponents, the form every enhanced Hamiltonian on the line and half-line
//! reduces to.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Monomial {
    pub coef: f64,
    pub p_pow: i32,
    pub q_pow: i32,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LaurentPoly {
    terms: Vec<Monomial>,
}

impl LaurentPoly {
    pub fn new(terms: impl IntoIterator<Item = Monomial>) -> Self {
        let mut map: BTreeMap<(i32, i32), f64> = BTreeMap::new();
        for m in terms {
            *map.entry((m.p_pow, m.q_pow)).or_insert(0.0) += m.coef;
        }
        Self {
            terms: map
                .into_iter()
                .filter(|&(_, c)| c != 0.0)
                .map(|((p_pow, q_pow), coef)| Monomial { coef, p_pow, q_pow })
                .collect(),
        }
    }

    pub fn from_triples(triples: &[(f64, i32, i32)]) -> Self {
        Self::new(
            triples
                .iter()
                .map(|&(coef, p_pow, q_pow)| Monomial { coef, p_pow, q_pow }),
        )
    }

    pub fn terms(&self) -> &[Monomial] {
        &self.terms
    }

    pub fn coefficient(&self, p_pow: i32, q_pow: i32) -> f64 {
        self.terms
            .iter()
            .find(|m| m.p_pow == p_pow && m.q_pow == q_pow)
            .map_or(0.0, |m| m.coef)
    }

    /// Drops terms whose magnitude is below `tol` times the largest coefficient.
    pub fn pruned(&self, tol: f64) -> Self {
        let scale = self.terms.iter().fold(0.0_f64, |m, t| m.max(t.coef.abs()));
        Self {
            terms: self
                .terms
                .iter()
                .copied()
                .filter(|t| t.coef.abs() > tol * scale)
                .collect(),
        }
    }

    pub fn has_negative_q_powers(&self) -> bool {
        self.terms.iter().any(|t| t.q_pow < 0)
    }

    /// True when no term mixes `p` and `q`, i.e. `H = T(p) + V(q)`.
    pub fn is_separable(&self) -> bool {
        self.terms.iter().all(|t| t.p_pow == 0 || t.q_pow == 0)
    }

    pub fn eval(&self, p: f64, q: f64) -> f64 {
        self.terms
            .iter()
            .map(|t| t.coef * p.powi(t.p_pow) * q.powi(t.q_pow))
            .sum()
    }

    pub fn gradient(&self, p: f64, q: f64) -> (f64, f64) {
        let mut gp = 0.0;
        let mut gq = 0.0;
        for t in &self.terms {
            if t.p_pow != 0 {
                gp += t.coef * t.p_pow as f64 * p.powi(t.p_pow - 1) * q.powi(t.q_pow);
            }
            if t.q_pow != 0 {
                gq += t.coef * t.q_pow as f64 * p.powi(t.p_pow) * q.powi(t.q_pow - 1);
            }
        }
        (gp, gq)
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self::new(self.terms.iter().map(|t| Monomial {
            coef: s * t.coef,
            ..*t
        }))
    }

    pub fn plus(&self, other: &Self) -> Self {
        Self::new(self.terms.iter().chain(other.terms.iter()).copied())
    }
}

impl fmt::Display for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, t) in self.terms.iter().enumerate() {
            let mag = t.coef.abs();
            if k == 0 {
                if t.coef < 0.0 {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if t.coef < 0.0 { '-' } else { '+' })?;
            }
            write!(f, "{mag:?}")?;
            for (name, pow) in [("p", t.p_pow), ("q", t.q_pow)] {
                match pow {
                    0 => {}
                    1 => write!(f, "*{name}")?,
                    _ => write!(f, "*{name}^{pow}")?,
                }
            }
        }
        Ok(())
    }
}
