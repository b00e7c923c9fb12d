//! Canonical coordinate changes as relabelings of the coherent states,
//! `|p̃,q̃⟩ ≡ |p(p̃,q̃), q(p̃,q̃)⟩`, with `p dq = p̃ dq̃ + dG̃`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::correspondence::{Hamiltonian, LabelDomain};
use crate::dynamics::action::loop_integral;
use crate::dynamics::trajectory::{Event, PhasePoint, Sample, Trajectory};
use crate::error::{EqError, Result};

pub const INVERSE_TOL: f64 = 1e-10;
pub const JACOBIAN_TOL: f64 = 1e-8;

type Map = Arc<dyn Fn(f64, f64) -> (f64, f64) + Send + Sync>;
type Scalar = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
/// `[[∂p̃/∂p, ∂p̃/∂q], [∂q̃/∂p, ∂q̃/∂q]]`.
pub type Jacobian = [[f64; 2]; 2];
type JacobianFn = Arc<dyn Fn(f64, f64) -> Jacobian + Send + Sync>;

#[derive(Clone)]
pub struct CanonicalTransform {
    name: String,
    forward: Map,
    inverse: Map,
    jacobian: Option<JacobianFn>,
    generator: Option<Scalar>,
}

impl fmt::Debug for CanonicalTransform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CanonicalTransform")
            .field("name", &self.name)
            .field("has_generator", &self.generator.is_some())
            .finish()
    }
}

impl CanonicalTransform {
    /// Transform from a forward/inverse pair. The Jacobian is taken numerically.
    pub fn custom(
        name: impl Into<String>,
        forward: impl Fn(f64, f64) -> (f64, f64) + Send + Sync + 'static,
        inverse: impl Fn(f64, f64) -> (f64, f64) + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            forward: Arc::new(forward),
            inverse: Arc::new(inverse),
            jacobian: None,
            generator: None,
        }
    }

    /// Attaches `G̃(p̃, q̃)`.
    pub fn with_generator(mut self, g: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        self.generator = Some(Arc::new(g));
        self
    }

    pub fn with_jacobian(
        mut self,
        j: impl Fn(f64, f64) -> Jacobian + Send + Sync + 'static,
    ) -> Self {
        self.jacobian = Some(Arc::new(j));
        self
    }

    pub fn identity() -> Self {
        Self::custom("identity", |p, q| (p, q), |p, q| (p, q))
            .with_jacobian(|_, _| [[1.0, 0.0], [0.0, 1.0]])
            .with_generator(|_, _| 0.0)
    }

    /// `(p̃, q̃) = (−q, p)`, with `G̃ = −p̃q̃`.
    pub fn rotation() -> Self {
        Self::custom("rotation", |p, q| (-q, p), |pt, qt| (qt, -pt))
            .with_jacobian(|_, _| [[0.0, -1.0], [1.0, 0.0]])
            .with_generator(|pt, qt| -pt * qt)
    }

    /// `(p̃, q̃) = (λp, q/λ)`, with `G̃ = 0`.
    pub fn scaling(lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(EqError::invalid(format!(
                "scaling factor must be positive, got {lambda}"
            )));
        }
        Ok(Self::custom(
            format!("scaling({lambda})"),
            move |p, q| (lambda * p, q / lambda),
            move |pt, qt| (pt / lambda, lambda * qt),
        )
        .with_jacobian(move |_, _| [[lambda, 0.0], [0.0, 1.0 / lambda]])
        .with_generator(|_, _| 0.0))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn forward(&self, p: f64, q: f64) -> (f64, f64) {
        (self.forward)(p, q)
    }

    pub fn inverse(&self, pt: f64, qt: f64) -> (f64, f64) {
        (self.inverse)(pt, qt)
    }

    pub fn generator(&self, pt: f64, qt: f64) -> Option<f64> {
        self.generator.as_ref().map(|g| g(pt, qt))
    }

    pub fn has_generator(&self) -> bool {
        self.generator.is_some()
    }

    /// Jacobian of the forward map at `(p, q)`.
    pub fn jacobian(&self, p: f64, q: f64) -> Jacobian {
        if let Some(j) = &self.jacobian {
            return j(p, q);
        }
        let hp = 1e-4 * p.abs().max(1.0);
        let hq = 1e-4 * q.abs().max(1.0);
        let d = |dp: f64, dq: f64| {
            let f = |s: f64| self.forward(p + s * dp, q + s * dq);
            let (a2, b2) = f(-2.0);
            let (a1, b1) = f(-1.0);
            let (c1, d1) = f(1.0);
            let (c2, d2) = f(2.0);
            let h = dp + dq;
            (
                (a2 - 8.0 * a1 + 8.0 * c1 - c2) / (12.0 * h),
                (b2 - 8.0 * b1 + 8.0 * d1 - d2) / (12.0 * h),
            )
        };
        let (pp, qp) = d(hp, 0.0);
        let (pq, qq) = d(0.0, hq);
        [[pp, pq], [qp, qq]]
    }

    /// Checks `inverse ∘ forward = id` and `det J = 1` at one label.
    pub fn check_point(&self, p: f64, q: f64) -> Result<()> {
        let (pt, qt) = self.forward(p, q);
        let (pb, qb) = self.inverse(pt, qt);
        let mismatch = (pb - p).abs().max((qb - q).abs());
        if !(mismatch <= INVERSE_TOL * p.abs().max(q.abs()).max(1.0)) {
            return Err(EqError::InvalidTransform(format!(
                "{}: inverse mismatch {mismatch:e} at ({p}, {q})",
                self.name
            )));
        }
        let j = self.jacobian(p, q);
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if !((det - 1.0).abs() <= JACOBIAN_TOL) {
            return Err(EqError::InvalidTransform(format!(
                "{}: Jacobian determinant {det} at ({p}, {q})",
                self.name
            )));
        }
        Ok(())
    }

    pub fn check_points(&self, points: impl IntoIterator<Item = (f64, f64)>) -> Result<()> {
        points
            .into_iter()
            .try_for_each(|(p, q)| self.check_point(p, q))
    }

    /// Velocity push-forward `J·(ṗ, q̇)`.
    fn push_velocity(&self, p: f64, q: f64, dp: f64, dq: f64) -> (f64, f64) {
        let j = self.jacobian(p, q);
        (j[0][0] * dp + j[0][1] * dq, j[1][0] * dp + j[1][1] * dq)
    }
}

/// Objects that can be relabeled by a canonical transform.
pub trait Relabel: Sized {
    fn relabel(&self, tr: &CanonicalTransform) -> Result<Self>;
}

impl Relabel for PhasePoint {
    fn relabel(&self, tr: &CanonicalTransform) -> Result<Self> {
        tr.check_point(self.p, self.q)?;
        let (p, q) = tr.forward(self.p, self.q);
        Ok(PhasePoint::new(self.t, p, q))
    }
}

impl Relabel for Trajectory {
    fn relabel(&self, tr: &CanonicalTransform) -> Result<Self> {
        tr.check_points(self.samples.iter().map(|s| (s.p, s.q)))?;
        let samples = self
            .samples
            .iter()
            .map(|s| {
                let (p, q) = tr.forward(s.p, s.q);
                let (dp, dq) = tr.push_velocity(s.p, s.q, s.dp, s.dq);
                Sample { p, q, dp, dq, ..*s }
            })
            .collect();
        let events = self
            .events
            .iter()
            .map(|e| {
                let (p, q) = tr.forward(e.p, e.q);
                Event { p, q, ..*e }
            })
            .collect();
        Trajectory::new(samples, events, self.termination)
    }
}

/// Pointwise relabeling of a point or trajectory. Energies are scalars and
/// carry over unchanged.
pub fn apply_transform<T: Relabel>(tr: &CanonicalTransform, target: &T) -> Result<T> {
    target.relabel(tr)
}

/// `H̃(p̃, q̃) = H(p(p̃,q̃), q(p̃,q̃))`.
#[derive(Clone)]
pub struct TransformedHamiltonian {
    base: Arc<dyn Hamiltonian>,
    tr: CanonicalTransform,
}

impl TransformedHamiltonian {
    pub fn new(base: Arc<dyn Hamiltonian>, tr: CanonicalTransform) -> Self {
        Self { base, tr }
    }

    pub fn transform(&self) -> &CanonicalTransform {
        &self.tr
    }
}

impl Hamiltonian for TransformedHamiltonian {
    fn value(&self, pt: f64, qt: f64) -> Result<f64> {
        let (p, q) = self.tr.inverse(pt, qt);
        self.base.value(p, q)
    }

    fn gradient(&self, pt: f64, qt: f64) -> Result<(f64, f64)> {
        let (p, q) = self.tr.inverse(pt, qt);
        let (hp, hq) = self.base.gradient(p, q)?;
        // inverse Jacobian of a unit-determinant map
        let j = self.tr.jacobian(p, q);
        let dp_dpt = j[1][1];
        let dp_dqt = -j[0][1];
        let dq_dpt = -j[1][0];
        let dq_dqt = j[0][0];
        Ok((hp * dp_dpt + hq * dq_dpt, hp * dp_dqt + hq * dq_dqt))
    }

    /// The image of a half-plane is not a half-plane in general; the base
    /// Hamiltonian still rejects labels that map outside its own domain.
    fn domain(&self) -> LabelDomain {
        LabelDomain::Plane
    }

    fn constant_shift(&self) -> f64 {
        self.base.constant_shift()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionCheck {
    /// `∫p dq − ∫p̃ dq̃ = G̃(end) − G̃(start)`.
    Generator,
    /// `∮p dq = ∮p̃ dq̃` on a closed orbit.
    ClosedLoop,
    /// No generator and the orbit does not close.
    NotApplicable,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TransformActionReport {
    pub transform: String,
    pub check: ActionCheck,
    pub original: f64,
    pub transformed: f64,
    pub generator_difference: Option<f64>,
    pub discrepancy: f64,
    pub closure_gap: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// Compares `∫p dq` in both charts along a trajectory.
pub fn verify_transform_action(
    tr: &CanonicalTransform,
    trajectory: &Trajectory,
    tolerance: f64,
) -> Result<TransformActionReport> {
    let moved = apply_transform(tr, trajectory)?;
    let original = loop_integral(trajectory)?;
    let transformed = loop_integral(&moved)?;
    let (a, b) = (trajectory.first(), trajectory.last());
    let closure_gap = (b.p - a.p).hypot(b.q - a.q);
    let (check, generator_difference, discrepancy) = match tr.has_generator() {
        true => {
            let (s, e) = (moved.first(), moved.last());
            let dg = tr.generator(e.p, e.q).unwrap_or(0.0) - tr.generator(s.p, s.q).unwrap_or(0.0);
            (
                ActionCheck::Generator,
                Some(dg),
                (original - transformed - dg).abs(),
            )
        }
        false if closure_gap <= tolerance => (
            ActionCheck::ClosedLoop,
            None,
            (original - transformed).abs(),
        ),
        false => (ActionCheck::NotApplicable, None, f64::NAN),
    };
    Ok(TransformActionReport {
        transform: tr.name().to_string(),
        check,
        original,
        transformed,
        generator_difference,
        discrepancy,
        closure_gap,
        tolerance,
        passed: discrepancy <= tolerance,
    })
}
