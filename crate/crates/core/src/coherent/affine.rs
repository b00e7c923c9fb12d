//! Affine coherent states `|p,q⟩ = e^{ipQ/ħ} e^{−i ln(q) D/ħ} |β⟩`, `q > 0`.

use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{EqError, Result};
use crate::hilbert::{GridKind, HalfLineRep, StateVector};
use crate::linalg::{c, CMatrix, CVector, HermitianGenerator, I};

/// `C₂ = ⟨β|P²|β⟩ = β²ħ / (2(β − ħ))`, finite only for `β > ħ`.
pub fn c2_closed_form(beta: f64, hbar: f64) -> Result<f64> {
    check_beta(beta, hbar)?;
    Ok(beta * beta * hbar / (2.0 * (beta - hbar)))
}

/// `⟨β|Q⁻¹|β⟩ = 2β / (2β − ħ)`.
pub fn inverse_moment_closed_form(beta: f64, hbar: f64) -> f64 {
    2.0 * beta / (2.0 * beta - hbar)
}

/// `⟨β|Q²|β⟩ = 1 + ħ/(2β)`.
pub fn second_moment_closed_form(beta: f64, hbar: f64) -> f64 {
    1.0 + hbar / (2.0 * beta)
}

fn check_q(q: f64) -> Result<()> {
    if !(q > 0.0) || !q.is_finite() {
        return Err(EqError::domain(format!(
            "affine label q must be > 0, got {q}"
        )));
    }
    Ok(())
}

fn check_beta(beta: f64, hbar: f64) -> Result<()> {
    if !(beta > hbar) || !beta.is_finite() {
        return Err(EqError::domain(format!(
            "affine fiducial needs beta > hbar for a finite <P^2> (beta = {beta}, hbar = {hbar})"
        )));
    }
    Ok(())
}

/// Half-line grid parameters for an affine family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AffineGridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub n: usize,
    #[serde(default)]
    pub kind: GridKind,
}

impl AffineGridSpec {
    /// Geometric grid resolving the fiducial dilated anywhere in
    /// `[q_lo, q_hi]`, including the `Q^{-1}` and formal-`P` tails.
    pub fn auto(beta: f64, hbar: f64, q_lo: f64, q_hi: f64) -> Self {
        let a = beta / hbar;
        let decay = 32.0;
        // near x = 0 the state falls like x^a and P|β⟩ like x^(a−1)
        let left_rate = (a - 1.0).max(0.5);
        let u_min = q_lo.ln() - decay / left_rate;
        // large x: exp(−a(e^v − 1 − v)) in v = u − ln q
        let (mut lo, mut hi) = (0.0_f64, 50.0_f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if a * (mid.exp() - 1.0 - mid) > decay {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let u_max = q_hi.ln() + hi;
        let h = (std::f64::consts::PI / (a + 60.0)).min(0.05);
        let mut n = ((u_max - u_min) / h).ceil() as usize + 1;
        if n % 2 == 1 {
            n += 1;
        }
        Self {
            x_min: u_min.exp(),
            x_max: u_max.exp(),
            n: n.max(crate::hilbert::MIN_GRID_POINTS),
            kind: GridKind::Geometric,
        }
    }

    pub fn build(&self, hbar: f64) -> Result<HalfLineRep> {
        HalfLineRep::new(self.x_min, self.x_max, self.n, hbar, self.kind)
    }
}

/// Default label window the automatic grid is sized for.
pub const DEFAULT_Q_WINDOW: (f64, f64) = (0.2, 5.0);

#[derive(Debug, Clone)]
pub struct AffineFamily {
    rep: Arc<HalfLineRep>,
    beta: f64,
    fiducial: StateVector,
    dilation: OnceLock<Arc<HermitianGenerator>>,
}

impl AffineFamily {
    pub fn new(beta: f64, rep: Arc<HalfLineRep>) -> Result<Self> {
        let fiducial = affine_fiducial(beta, &rep)?;
        Ok(Self {
            rep,
            beta,
            fiducial,
            dilation: OnceLock::new(),
        })
    }

    /// Family on an automatically sized geometric grid.
    pub fn with_auto_grid(beta: f64, hbar: f64) -> Result<Self> {
        check_beta(beta, hbar)?;
        let (lo, hi) = DEFAULT_Q_WINDOW;
        let spec = AffineGridSpec::auto(beta, hbar, lo, hi);
        Self::new(beta, Arc::new(spec.build(hbar)?))
    }

    pub fn rep(&self) -> &HalfLineRep {
        &self.rep
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn hbar(&self) -> f64 {
        self.rep.hbar()
    }

    pub fn fiducial(&self) -> &StateVector {
        &self.fiducial
    }

    /// `‖[(Q − 1) + (i/β)D]|β⟩‖`.
    pub fn fiducial_residual(&self) -> f64 {
        let v = self.fiducial.amplitudes();
        let r = self.rep.q() * v - v + (self.rep.d() * v) * (I / self.beta);
        r.norm()
    }

    /// `⟨β|A|β⟩`.
    pub fn fiducial_moment(&self, op: &CMatrix) -> Result<f64> {
        Ok(self.fiducial.expectation(op)?.re)
    }

    /// `C₂ = ⟨β|P²|β⟩` measured on the grid as `‖P|β⟩‖²`.
    pub fn c2(&self) -> f64 {
        (self.rep.p_formal() * self.fiducial.amplitudes()).norm_squared()
    }

    /// `⟨β|Q⁻¹|β⟩` measured on the grid.
    pub fn inverse_moment(&self) -> f64 {
        let v = self.fiducial.amplitudes();
        self.rep
            .grid()
            .points()
            .iter()
            .zip(v.iter())
            .map(|(x, z)| z.norm_sqr() / x)
            .sum()
    }

    /// `e^{−i ln(q) D/ħ} |β⟩`, i.e. `q^{−1/2} ψ_β(x/q)` sampled on the grid.
    pub fn dilated_fiducial(&self, q: f64) -> Result<StateVector> {
        check_q(q)?;
        let a = self.beta / self.hbar();
        let ln_q = q.ln();
        self.rep.sample(|x| {
            let y = x.ln() - ln_q;
            c(((a - 0.5) * y - a * y.exp()).exp())
        })
    }

    /// Same dilation through the exponentiated generator `D`.
    pub fn dilated_fiducial_spectral(&self, q: f64) -> Result<StateVector> {
        check_q(q)?;
        let gen = match self.dilation.get() {
            Some(g) => g.clone(),
            None => {
                let g = Arc::new(self.rep.dilation_generator()?);
                self.dilation.get_or_init(|| g).clone()
            }
        };
        Ok(StateVector::from_raw(
            gen.apply(q.ln(), self.fiducial.amplitudes()),
        ))
    }

    pub fn state(&self, p: f64, q: f64) -> Result<StateVector> {
        affine_cs(p, q, self)
    }
}

/// Grid samples of `⟨x|β⟩ = M x^{β/ħ − 1/2} e^{−(β/ħ)x}`, normalized on the grid.
pub fn affine_fiducial(beta: f64, rep: &HalfLineRep) -> Result<StateVector> {
    let hbar = rep.hbar();
    check_beta(beta, hbar)?;
    let a = beta / hbar;
    rep.sample(|x| c(((a - 0.5) * x.ln() - a * x).exp()))
}

pub fn affine_cs(p: f64, q: f64, family: &AffineFamily) -> Result<StateVector> {
    if !p.is_finite() {
        return Err(EqError::domain("affine label p must be finite"));
    }
    let dilated = family.dilated_fiducial(q)?;
    let hbar = family.hbar();
    let points = family.rep.grid().points();
    let amps = CVector::from_iterator(
        points.len(),
        dilated
            .amplitudes()
            .iter()
            .zip(points)
            .map(|(z, &x)| z * num_complex::Complex64::from_polar(1.0, p * x / hbar)),
    );
    Ok(StateVector::from_raw(amps))
}
