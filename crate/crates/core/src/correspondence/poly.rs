//! Hermitian operator polynomials over the letters `P, Q, D, S1, S2, S3`.
//!
//! Grammar (whitespace is insignificant):
//!
//! ```text
//! expr   := [sign] term (sign term)*
//! term   := number | [number '*'] factor ('*' factor)*
//! factor := letter ['^' digits]
//! letter := 'P' | 'Q' | 'D' | 'S1' | 'S2' | 'S3'
//! ```
//!
//! Powers are non-negative integers only; `Q^-1` is rejected.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{EqError, Result};

/// Default cap on the classical degree (`D` counts as 2).
pub const DEFAULT_MAX_DEGREE: u32 = 6;

const HERMITIAN_RTOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Letter {
    P,
    Q,
    D,
    S1,
    S2,
    S3,
}

impl Letter {
    pub fn is_spin(self) -> bool {
        matches!(self, Letter::S1 | Letter::S2 | Letter::S3)
    }

    /// Degree in the classical variables `(p, q)`.
    pub fn degree(self) -> u32 {
        match self {
            Letter::D => 2,
            _ => 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Letter::P => "P",
            Letter::Q => "Q",
            Letter::D => "D",
            Letter::S1 => "S1",
            Letter::S2 => "S2",
            Letter::S3 => "S3",
        }
    }
}

pub type Word = Vec<Letter>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VariableSet {
    /// Contains `P` (optionally with `Q`, `D`).
    Canonical,
    /// Only `Q` and `D`.
    Affine,
    /// Only spin letters.
    Spin,
}

/// Sum of real multiples of operator words, Hermitian as a whole.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorPolynomial {
    terms: BTreeMap<Word, f64>,
}

impl OperatorPolynomial {
    pub fn parse(text: &str) -> Result<Self> {
        Self::parse_with_max_degree(text, DEFAULT_MAX_DEGREE)
    }

    pub fn parse_with_max_degree(text: &str, max_degree: u32) -> Result<Self> {
        let terms = Parser::new(text).parse()?;
        Self::from_terms_with_max_degree(terms, max_degree)
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (f64, Word)>) -> Result<Self> {
        Self::from_terms_with_max_degree(terms, DEFAULT_MAX_DEGREE)
    }

    pub fn from_terms_with_max_degree(
        terms: impl IntoIterator<Item = (f64, Word)>,
        max_degree: u32,
    ) -> Result<Self> {
        let mut map: BTreeMap<Word, f64> = BTreeMap::new();
        for (c, w) in terms {
            if !c.is_finite() {
                return Err(EqError::invalid(
                    "operator polynomial coefficient is not finite",
                ));
            }
            *map.entry(w).or_insert(0.0) += c;
        }
        map.retain(|_, c| *c != 0.0);
        let poly = Self { terms: map };
        poly.check(max_degree)?;
        Ok(poly)
    }

    fn check(&self, max_degree: u32) -> Result<()> {
        let spin = self.terms.keys().flatten().any(|l| l.is_spin());
        let line = self.terms.keys().flatten().any(|l| !l.is_spin());
        if spin && line {
            return Err(EqError::invalid(
                "operator polynomial mixes spin letters with P, Q, D",
            ));
        }
        if self.degree() > max_degree {
            return Err(EqError::invalid(format!(
                "operator polynomial degree {} exceeds the cap {max_degree}",
                self.degree()
            )));
        }
        let scale = self.terms.values().fold(0.0_f64, |m, c| m.max(c.abs()));
        for (w, c) in &self.terms {
            let rev: Word = w.iter().rev().copied().collect();
            let partner = self.terms.get(&rev).copied().unwrap_or(0.0);
            if (c - partner).abs() > HERMITIAN_RTOL * scale {
                return Err(EqError::invalid(format!(
                    "operator polynomial is not Hermitian: {c}*{} has partner coefficient {partner}",
                    word_string(w)
                )));
            }
        }
        Ok(())
    }

    pub fn terms(&self) -> impl Iterator<Item = (f64, &Word)> {
        self.terms.iter().map(|(w, &c)| (c, w))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|w| word_degree(w)).max().unwrap_or(0)
    }

    pub fn max_word_len(&self) -> usize {
        self.terms.keys().map(Vec::len).max().unwrap_or(0)
    }

    pub fn letters(&self) -> impl Iterator<Item = Letter> + '_ {
        self.terms.keys().flatten().copied()
    }

    pub fn variable_set(&self) -> VariableSet {
        if self.letters().any(Letter::is_spin) {
            VariableSet::Spin
        } else if self.letters().any(|l| l == Letter::P) {
            VariableSet::Canonical
        } else {
            VariableSet::Affine
        }
    }

    /// `α·self + γ·other`.
    pub fn linear_combination(&self, alpha: f64, other: &Self, gamma: f64) -> Result<Self> {
        let terms = self
            .terms()
            .map(|(c, w)| (alpha * c, w.clone()))
            .chain(other.terms().map(|(c, w)| (gamma * c, w.clone())));
        let cap = self.degree().max(other.degree()).max(DEFAULT_MAX_DEGREE);
        Self::from_terms_with_max_degree(terms, cap)
    }

    /// Value of the word product with `P → p`, `Q → q`, `D → pq`.
    pub fn classical_value(&self, p: f64, q: f64) -> Result<f64> {
        let mut total = 0.0;
        for (c, w) in self.terms() {
            let mut v = c;
            for &l in w {
                v *= match l {
                    Letter::P => p,
                    Letter::Q => q,
                    Letter::D => p * q,
                    _ => {
                        return Err(EqError::invalid(
                            "classical value is defined for P, Q, D words only",
                        ))
                    }
                };
            }
            total += v;
        }
        Ok(total)
    }
}

impl FromStr for OperatorPolynomial {
    type Err = EqError;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s)
    }
}

pub fn word_degree(w: &[Letter]) -> u32 {
    w.iter().map(|l| l.degree()).sum()
}

pub fn word_string(w: &[Letter]) -> String {
    if w.is_empty() {
        return "1".into();
    }
    let mut out = String::new();
    let mut i = 0;
    while i < w.len() {
        let mut j = i;
        while j < w.len() && w[j] == w[i] {
            j += 1;
        }
        if !out.is_empty() {
            out.push('*');
        }
        out.push_str(w[i].name());
        if j - i > 1 {
            out.push_str(&format!("^{}", j - i));
        }
        i = j;
    }
    out
}

impl fmt::Display for OperatorPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (c, w)) in self.terms().enumerate() {
            let (sign, mag) = if c < 0.0 { ("-", -c) } else { ("+", c) };
            match (k, sign) {
                (0, "-") => write!(f, "-")?,
                (0, _) => {}
                _ => write!(f, " {sign} ")?,
            }
            if w.is_empty() {
                write!(f, "{mag:?}")?;
            } else if mag == 1.0 {
                write!(f, "{}", word_string(w))?;
            } else {
                write!(f, "{mag:?}*{}", word_string(w))?;
            }
        }
        Ok(())
    }
}

impl Serialize for OperatorPolynomial {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for OperatorPolynomial {
    fn deserialize<De: serde::Deserializer<'de>>(d: De) -> std::result::Result<Self, De::Error> {
        let text = String::deserialize(d)?;
        Self::parse(&text).map_err(serde::de::Error::custom)
    }
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Self {
        Self { src, pos: 0 }
    }

    fn err(&self, msg: impl fmt::Display) -> EqError {
        EqError::invalid(format!(
            "operator polynomial, column {}: {msg}",
            self.pos + 1
        ))
    }

    fn skip_ws(&mut self) {
        while let Some(ch) = self.peek() {
            if ch.is_whitespace() {
                self.pos += ch.len_utf8();
            } else {
                break;
            }
        }
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn eat(&mut self, ch: char) -> bool {
        self.skip_ws();
        if self.peek() == Some(ch) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn parse(mut self) -> Result<Vec<(f64, Word)>> {
        let mut terms = Vec::new();
        self.skip_ws();
        if self.peek().is_none() {
            return Err(self.err("empty expression"));
        }
        let mut sign = if self.eat('-') {
            -1.0
        } else {
            self.eat('+');
            1.0
        };
        loop {
            let (c, w) = self.term()?;
            terms.push((sign * c, w));
            self.skip_ws();
            match self.peek() {
                None => break,
                Some('+') => sign = 1.0,
                Some('-') => sign = -1.0,
                Some(ch) => return Err(self.err(format!("unexpected '{ch}'"))),
            }
            self.pos += 1;
        }
        Ok(terms)
    }

    fn term(&mut self) -> Result<(f64, Word)> {
        self.skip_ws();
        let mut coef = 1.0;
        let mut word = Word::new();
        if matches!(self.peek(), Some(ch) if ch.is_ascii_digit() || ch == '.') {
            coef = self.number()?;
            if !self.eat('*') {
                return Ok((coef, word));
            }
        }
        loop {
            let (letter, power) = self.factor()?;
            word.extend(std::iter::repeat_n(letter, power));
            if !self.eat('*') {
                break;
            }
        }
        Ok((coef, word))
    }

    fn number(&mut self) -> Result<f64> {
        let rest = &self.src[self.pos..];
        let mut end = 0;
        let bytes = rest.as_bytes();
        while end < bytes.len() && (bytes[end].is_ascii_digit() || bytes[end] == b'.') {
            end += 1;
        }
        if end < bytes.len() && (bytes[end] == b'e' || bytes[end] == b'E') {
            let mut k = end + 1;
            if k < bytes.len() && (bytes[k] == b'+' || bytes[k] == b'-') {
                k += 1;
            }
            if k < bytes.len() && bytes[k].is_ascii_digit() {
                while k < bytes.len() && bytes[k].is_ascii_digit() {
                    k += 1;
                }
                end = k;
            }
        }
        let text = &rest[..end];
        let value: f64 = text
            .parse()
            .map_err(|_| self.err(format!("bad number '{text}'")))?;
        self.pos += end;
        Ok(value)
    }

    fn factor(&mut self) -> Result<(Letter, usize)> {
        self.skip_ws();
        let rest = &self.src[self.pos..];
        let (letter, len) = if rest.starts_with("S1") {
            (Letter::S1, 2)
        } else if rest.starts_with("S2") {
            (Letter::S2, 2)
        } else if rest.starts_with("S3") {
            (Letter::S3, 2)
        } else {
            match rest.chars().next() {
                Some('P') => (Letter::P, 1),
                Some('Q') => (Letter::Q, 1),
                Some('D') => (Letter::D, 1),
                Some(ch) => {
                    return Err(self.err(format!("expected an operator letter, found '{ch}'")))
                }
                None => return Err(self.err("expected an operator letter")),
            }
        };
        self.pos += len;
        if matches!(self.peek(), Some(ch) if ch.is_ascii_alphanumeric()) {
            return Err(self.err("operator letters must be separated by '*'"));
        }
        if !self.eat('^') {
            return Ok((letter, 1));
        }
        self.skip_ws();
        if self.peek() == Some('-') {
            return Err(self.err("negative powers are not allowed"));
        }
        let digits: String = self.src[self.pos..]
            .chars()
            .take_while(char::is_ascii_digit)
            .collect();
        if digits.is_empty() {
            return Err(self.err("expected a non-negative integer power"));
        }
        self.pos += digits.len();
        let power = digits
            .parse::<usize>()
            .map_err(|_| self.err("power too large"))?;
        Ok((letter, power))
    }
}
