//! Coherent-state families, overlaps and Fubini–Study geometry.

pub mod affine;
pub mod canonical;
pub mod extended;
pub mod metric;
pub mod spin;

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{EqError, Result};
use crate::hilbert::{LineRep, SpinRep, StateVector};

pub use crate::hilbert::overlap;
pub use affine::{
    affine_cs, affine_fiducial, c2_closed_form, inverse_moment_closed_form,
    second_moment_closed_form, AffineFamily, AffineGridSpec,
};
pub use canonical::{canonical_cs, required_fock_dim, CanonicalFamily};
pub use extended::{extended_cs, ExtendedFamily};
pub use metric::{
    fs_metric_analytic, fs_metric_numeric, fs_metric_numeric_detailed, scalar_curvature,
    MetricEstimate, MetricTensor2, DEFAULT_METRIC_STEP,
};
pub use spin::{angles_to_pq, pq_to_angles, spin_cs, SpinFamily};

/// Anything that maps phase-space labels to unit vectors.
pub trait StateMap {
    fn hbar(&self) -> f64;
    fn state(&self, p: f64, q: f64) -> Result<StateVector>;
    /// Errors unless the label box of half-width `margin` around `(p, q)`
    /// lies in the open label domain.
    fn check_interior(&self, p: f64, q: f64, margin: f64) -> Result<()>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    Canonical,
    Affine,
    Spin,
    Extended,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FamilyParams {
    Canonical { hbar: f64 },
    Affine { beta: f64, hbar: f64 },
    Spin { s: f64, hbar: f64 },
    Extended { a: f64, b: f64, hbar: f64 },
}

impl FamilyParams {
    pub fn kind(&self) -> FamilyKind {
        match self {
            Self::Canonical { .. } => FamilyKind::Canonical,
            Self::Affine { .. } => FamilyKind::Affine,
            Self::Spin { .. } => FamilyKind::Spin,
            Self::Extended { .. } => FamilyKind::Extended,
        }
    }

    pub fn hbar(&self) -> f64 {
        match *self {
            Self::Canonical { hbar }
            | Self::Affine { hbar, .. }
            | Self::Spin { hbar, .. }
            | Self::Extended { hbar, .. } => hbar,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let hbar = self.hbar();
        if !(hbar > 0.0) || !hbar.is_finite() {
            return Err(EqError::invalid(format!(
                "hbar must be positive, got {hbar}"
            )));
        }
        match *self {
            Self::Affine { beta, .. } => {
                if !beta.is_finite() {
                    return Err(EqError::invalid("beta must be finite"));
                }
                if beta <= hbar {
                    return Err(EqError::domain(format!(
                        "affine fiducial needs beta > hbar (beta = {beta}, hbar = {hbar})"
                    )));
                }
            }
            Self::Spin { s, .. } => {
                let twice = 2.0 * s;
                if !(twice >= 1.0) || twice.fract() != 0.0 {
                    return Err(EqError::invalid(format!(
                        "spin must be a positive half-integer, got {s}"
                    )));
                }
            }
            Self::Extended { a, b, .. } => {
                if !a.is_finite() || !b.is_finite() {
                    return Err(EqError::invalid("extended parameters must be finite"));
                }
            }
            Self::Canonical { .. } => {}
        }
        Ok(())
    }

    /// Errors when `(p, q)` lies outside the closed label domain.
    pub fn check_label(&self, p: f64, q: f64) -> Result<()> {
        if !p.is_finite() || !q.is_finite() {
            return Err(EqError::domain(format!("non-finite label ({p}, {q})")));
        }
        match *self {
            Self::Canonical { .. } | Self::Extended { .. } => Ok(()),
            Self::Affine { .. } => {
                if q > 0.0 {
                    Ok(())
                } else {
                    Err(EqError::domain(format!(
                        "affine label needs q > 0, got {q}"
                    )))
                }
            }
            Self::Spin { s, hbar } => pq_to_angles(p, q, s, hbar).map(|_| ()),
        }
    }

    pub fn check_interior(&self, p: f64, q: f64, margin: f64) -> Result<()> {
        self.check_label(p, q)?;
        let fail = || {
            Err(EqError::domain(format!(
                "label ({p}, {q}) is within {margin} of the domain boundary"
            )))
        };
        match *self {
            Self::Canonical { .. } | Self::Extended { .. } => Ok(()),
            Self::Affine { .. } => {
                if q - margin > 0.0 {
                    Ok(())
                } else {
                    fail()
                }
            }
            Self::Spin { s, hbar } => {
                let r = (s * hbar).sqrt();
                if p.abs() + margin < r && q - margin > -PI * r && q + margin <= PI * r {
                    Ok(())
                } else {
                    fail()
                }
            }
        }
    }
}

/// A constructed family together with its representation.
#[derive(Debug, Clone)]
pub enum CoherentFamily {
    Canonical(CanonicalFamily),
    Affine(AffineFamily),
    Spin(SpinFamily),
    Extended(ExtendedFamily),
}

impl CoherentFamily {
    /// Builds the family; `line_dim` sizes the Fock block for the canonical
    /// and extended kinds, the affine kind sizes its own grid.
    pub fn build(params: FamilyParams, line_dim: usize) -> Result<Self> {
        params.validate()?;
        Ok(match params {
            FamilyParams::Canonical { hbar } => Self::Canonical(CanonicalFamily::new(Arc::new(
                LineRep::new(line_dim, hbar)?,
            ))),
            FamilyParams::Affine { beta, hbar } => {
                Self::Affine(AffineFamily::with_auto_grid(beta, hbar)?)
            }
            FamilyParams::Spin { s, hbar } => {
                Self::Spin(SpinFamily::new(Arc::new(SpinRep::new(s, hbar)?))?)
            }
            FamilyParams::Extended { a, b, hbar } => Self::Extended(ExtendedFamily::new(
                Arc::new(LineRep::new(line_dim, hbar)?),
                a,
                b,
            )?),
        })
    }

    pub fn kind(&self) -> FamilyKind {
        self.params().kind()
    }

    pub fn params(&self) -> FamilyParams {
        match self {
            Self::Canonical(f) => f.family_params(),
            Self::Affine(f) => f.family_params(),
            Self::Spin(f) => f.family_params(),
            Self::Extended(f) => f.family_params(),
        }
    }

    pub fn fiducial(&self) -> StateVector {
        match self {
            Self::Canonical(f) => f.fiducial(),
            Self::Affine(f) => f.fiducial().clone(),
            Self::Spin(f) => f.fiducial(),
            Self::Extended(f) => f.fiducial(),
        }
    }

    /// Norm of the defining annihilation relation applied to the fiducial.
    pub fn fiducial_residual(&self) -> f64 {
        match self {
            Self::Canonical(f) => f.fiducial_residual(),
            Self::Affine(f) => f.fiducial_residual(),
            Self::Spin(f) => f.fiducial_residual(),
            Self::Extended(f) => {
                CanonicalFamily::new(Arc::new(f.rep().clone())).fiducial_residual()
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.fiducial().dim()
    }
}

impl From<CanonicalFamily> for CoherentFamily {
    fn from(f: CanonicalFamily) -> Self {
        Self::Canonical(f)
    }
}

impl From<AffineFamily> for CoherentFamily {
    fn from(f: AffineFamily) -> Self {
        Self::Affine(f)
    }
}

impl From<SpinFamily> for CoherentFamily {
    fn from(f: SpinFamily) -> Self {
        Self::Spin(f)
    }
}

impl From<ExtendedFamily> for CoherentFamily {
    fn from(f: ExtendedFamily) -> Self {
        Self::Extended(f)
    }
}

impl StateMap for CoherentFamily {
    fn hbar(&self) -> f64 {
        self.params().hbar()
    }

    fn state(&self, p: f64, q: f64) -> Result<StateVector> {
        match self {
            Self::Canonical(f) => f.state(p, q),
            Self::Affine(f) => f.state(p, q),
            Self::Spin(f) => f.state(p, q),
            Self::Extended(f) => f.state(p, q),
        }
    }

    fn check_interior(&self, p: f64, q: f64, margin: f64) -> Result<()> {
        self.params().check_interior(p, q, margin)
    }
}

impl CanonicalFamily {
    pub fn family_params(&self) -> FamilyParams {
        FamilyParams::Canonical { hbar: self.hbar() }
    }
}

impl AffineFamily {
    pub fn family_params(&self) -> FamilyParams {
        FamilyParams::Affine {
            beta: self.beta(),
            hbar: self.hbar(),
        }
    }
}

impl SpinFamily {
    pub fn family_params(&self) -> FamilyParams {
        FamilyParams::Spin {
            s: self.s(),
            hbar: self.hbar(),
        }
    }
}

impl ExtendedFamily {
    pub fn family_params(&self) -> FamilyParams {
        let (a, b) = self.params();
        FamilyParams::Extended {
            a,
            b,
            hbar: self.hbar(),
        }
    }
}

macro_rules! state_map_via_params {
    ($($t:ty),*) => {$(
        impl StateMap for $t {
            fn hbar(&self) -> f64 {
                <$t>::hbar(self)
            }
            fn state(&self, p: f64, q: f64) -> Result<StateVector> {
                <$t>::state(self, p, q)
            }
            fn check_interior(&self, p: f64, q: f64, margin: f64) -> Result<()> {
                self.family_params().check_interior(p, q, margin)
            }
        }
    )*};
}

state_map_via_params!(CanonicalFamily, AffineFamily, SpinFamily, ExtendedFamily);
