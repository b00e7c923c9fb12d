//! Fubini–Study metric `dσ² = 2ħ[‖dψ‖² − |⟨ψ|dψ⟩|²]` on coherent-state
//! sheets, numerically from the state map and in closed form, plus the
//! scalar curvature of the closed forms.

use serde::{Deserialize, Serialize};

use crate::coherent::{FamilyParams, StateMap};
use crate::error::{EqError, Result};
use crate::linalg::CVector;

pub const DEFAULT_METRIC_STEP: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricTensor2 {
    pub g_pp: f64,
    pub g_pq: f64,
    pub g_qq: f64,
}

impl MetricTensor2 {
    pub fn new(g_pp: f64, g_pq: f64, g_qq: f64) -> Self {
        Self { g_pp, g_pq, g_qq }
    }

    pub fn identity() -> Self {
        Self::new(1.0, 0.0, 1.0)
    }

    pub fn diagonal(g_pp: f64, g_qq: f64) -> Self {
        Self::new(g_pp, 0.0, g_qq)
    }

    pub fn det(&self) -> f64 {
        self.g_pp * self.g_qq - self.g_pq * self.g_pq
    }

    pub fn is_positive_definite(&self) -> bool {
        self.g_pp > 0.0 && self.det() > 0.0
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (self.g_pp - other.g_pp)
            .abs()
            .max((self.g_pq - other.g_pq).abs())
            .max((self.g_qq - other.g_qq).abs())
    }

    /// Componentwise difference scaled by the largest diagonal entry of `other`.
    pub fn max_rel_diff(&self, other: &Self) -> f64 {
        let scale = other.g_pp.abs().max(other.g_qq.abs());
        self.max_abs_diff(other) / scale
    }

    fn lincomb(a: &Self, wa: f64, b: &Self, wb: f64) -> Self {
        Self::new(
            wa * a.g_pp + wb * b.g_pp,
            wa * a.g_pq + wb * b.g_pq,
            wa * a.g_qq + wb * b.g_qq,
        )
    }
}

/// Numeric metric together with its step-refinement diagnostics.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricEstimate {
    /// Richardson-extrapolated metric.
    pub metric: MetricTensor2,
    pub steps: [f64; 3],
    /// Plain central-difference metrics at each step.
    pub raw: [MetricTensor2; 3],
    /// `log₂` of successive difference ratios; infinite when the differences
    /// are already at round-off level.
    pub observed_order: f64,
    pub error_estimate: f64,
}

/// Central-difference Fubini–Study metric at a single step.
fn fs_at_step<M: StateMap + ?Sized>(family: &M, p: f64, q: f64, h: f64) -> Result<MetricTensor2> {
    let psi = family.state(p, q)?;
    let v = psi.amplitudes();
    let deriv = |a: CVector, b: CVector| (a - b).unscale(2.0 * h);
    let dp = deriv(
        family.state(p + h, q)?.into_amplitudes(),
        family.state(p - h, q)?.into_amplitudes(),
    );
    let dq = deriv(
        family.state(p, q + h)?.into_amplitudes(),
        family.state(p, q - h)?.into_amplitudes(),
    );
    let g = |a: &CVector, b: &CVector| {
        let inner = a.dotc(b) - a.dotc(v) * v.dotc(b);
        2.0 * family.hbar() * inner.re
    };
    Ok(MetricTensor2::new(g(&dp, &dp), g(&dp, &dq), g(&dq, &dq)))
}

/// Richardson-extrapolated numeric Fubini–Study metric.
pub fn fs_metric_numeric<M: StateMap + ?Sized>(
    family: &M,
    p: f64,
    q: f64,
    h: f64,
) -> Result<MetricTensor2> {
    fs_metric_numeric_detailed(family, p, q, h).map(|e| e.metric)
}

pub fn fs_metric_numeric_detailed<M: StateMap + ?Sized>(
    family: &M,
    p: f64,
    q: f64,
    h: f64,
) -> Result<MetricEstimate> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(EqError::invalid(format!(
            "metric step must be positive, got {h}"
        )));
    }
    family.check_interior(p, q, 2.0 * h)?;
    let steps = [h, h / 2.0, h / 4.0];
    let raw = [
        fs_at_step(family, p, q, steps[0])?,
        fs_at_step(family, p, q, steps[1])?,
        fs_at_step(family, p, q, steps[2])?,
    ];
    let d1 = raw[0].max_abs_diff(&raw[1]);
    let d2 = raw[1].max_abs_diff(&raw[2]);
    let scale = raw[2].g_pp.abs().max(raw[2].g_qq.abs()).max(1e-300);
    // round-off in a central difference of unit vectors is ~ ε/h
    let noise = scale * 1e-15 / steps[2] * 10.0;
    let observed_order = if d2 <= noise {
        f64::INFINITY
    } else {
        (d1 / d2).log2()
    };
    if d2 > noise && d1 > noise && observed_order < 1.0 {
        return Err(EqError::numerical(
            "Richardson sequence for the Fubini-Study metric does not converge",
            vec![p, q, h, d1, d2, observed_order],
        ));
    }
    let metric = MetricTensor2::lincomb(&raw[2], 4.0 / 3.0, &raw[1], -1.0 / 3.0);
    Ok(MetricEstimate {
        metric,
        steps,
        raw,
        observed_order,
        error_estimate: d2 / 3.0,
    })
}

/// Closed-form metrics: flat (canonical and extended), Poincaré half-plane
/// (affine) and round sphere of radius `√(sħ)` (spin).
pub fn fs_metric_analytic(params: &FamilyParams, p: f64, q: f64) -> Result<MetricTensor2> {
    params.check_label(p, q)?;
    match *params {
        FamilyParams::Canonical { .. } | FamilyParams::Extended { .. } => {
            Ok(MetricTensor2::identity())
        }
        FamilyParams::Affine { beta, .. } => {
            Ok(MetricTensor2::diagonal(q * q / beta, beta / (q * q)))
        }
        FamilyParams::Spin { s, hbar } => {
            let f = 1.0 - p * p / (s * hbar);
            if !(f > 0.0) {
                return Err(EqError::domain(format!(
                    "spin metric is singular at the poles (p = {p})"
                )));
            }
            Ok(MetricTensor2::diagonal(1.0 / f, f))
        }
    }
}

/// Scalar curvature `R = 2K` of the closed-form metric, with the Gaussian
/// curvature `K` from the Brioschi formula and Richardson-refined central
/// differences.
pub fn scalar_curvature(params: &FamilyParams, p: f64, q: f64) -> Result<f64> {
    let g0 = fs_metric_analytic(params, p, q)?;
    // unit-length steps in the metric's own scale
    let hp = 1e-3 / g0.g_pp.sqrt();
    let hq = 1e-3 / g0.g_qq.sqrt();
    params.check_label(p - 2.0 * hp, q - 2.0 * hq)?;
    params.check_label(p + 2.0 * hp, q + 2.0 * hq)?;
    let k1 = brioschi(params, p, q, hp, hq)?;
    let k2 = brioschi(params, p, q, hp / 2.0, hq / 2.0)?;
    Ok(2.0 * (4.0 * k2 - k1) / 3.0)
}

fn brioschi(params: &FamilyParams, u: f64, v: f64, hu: f64, hv: f64) -> Result<f64> {
    let g = |du: f64, dv: f64| fs_metric_analytic(params, u + du, v + dv);
    let c = g(0.0, 0.0)?;
    let (up, um, vp, vm) = (g(hu, 0.0)?, g(-hu, 0.0)?, g(0.0, hv)?, g(0.0, -hv)?);
    let (pp, pm, mp, mm) = (g(hu, hv)?, g(hu, -hv)?, g(-hu, hv)?, g(-hu, -hv)?);

    let (e, f, gg) = (c.g_pp, c.g_pq, c.g_qq);
    let e_u = (up.g_pp - um.g_pp) / (2.0 * hu);
    let e_v = (vp.g_pp - vm.g_pp) / (2.0 * hv);
    let f_u = (up.g_pq - um.g_pq) / (2.0 * hu);
    let f_v = (vp.g_pq - vm.g_pq) / (2.0 * hv);
    let g_u = (up.g_qq - um.g_qq) / (2.0 * hu);
    let g_v = (vp.g_qq - vm.g_qq) / (2.0 * hv);
    let e_vv = (vp.g_pp - 2.0 * e + vm.g_pp) / (hv * hv);
    let g_uu = (up.g_qq - 2.0 * gg + um.g_qq) / (hu * hu);
    let f_uv = (pp.g_pq - pm.g_pq - mp.g_pq + mm.g_pq) / (4.0 * hu * hv);

    let det3 = |m: [[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let a = det3([
        [-0.5 * e_vv + f_uv - 0.5 * g_uu, 0.5 * e_u, f_u - 0.5 * e_v],
        [f_v - 0.5 * g_u, e, f],
        [0.5 * g_v, f, gg],
    ]);
    let b = det3([
        [0.0, 0.5 * e_v, 0.5 * g_u],
        [0.5 * e_v, e, f],
        [0.5 * g_u, f, gg],
    ]);
    let w = e * gg - f * f;
    Ok((a - b) / (w * w))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coherent::{AffineFamily, CanonicalFamily, SpinFamily};
    use crate::hilbert::{LineRep, SpinRep, StateVector};
    use std::sync::Arc;

    /// Gaussian curvature of E dp² + G dq² when E, G depend on q only:
    /// K = −(1/(2√(EG))) d/dq (E_q/√(EG)), derived by hand for the oracle.
    fn diagonal_q_only_curvature(e: impl Fn(f64) -> f64, g: impl Fn(f64) -> f64, q: f64) -> f64 {
        let h = 1e-4;
        let w = |q: f64| (e(q) * g(q)).sqrt();
        let inner = |q: f64| ((e(q + h) - e(q - h)) / (2.0 * h)) / w(q);
        -(inner(q + h) - inner(q - h)) / (2.0 * h) / (2.0 * w(q))
    }

    #[test]
    fn canonical_metric_is_flat() {
        let fam = CanonicalFamily::new(Arc::new(LineRep::new(120, 1.0).unwrap()));
        for &(p, q) in &[(0.0, 0.0), (1.0, -2.0), (2.5, 1.5)] {
            let est = fs_metric_numeric_detailed(&fam, p, q, DEFAULT_METRIC_STEP).unwrap();
            assert!(
                est.metric.max_abs_diff(&MetricTensor2::identity()) < 1e-8,
                "{est:?}"
            );
        }
        let params = FamilyParams::Canonical { hbar: 1.0 };
        assert!(scalar_curvature(&params, 0.3, -2.0).unwrap().abs() < 1e-9);
    }

    #[test]
    fn affine_metric_matches_half_plane() {
        let beta = 2.0;
        let fam = AffineFamily::with_auto_grid(beta, 1.0).unwrap();
        let params = FamilyParams::Affine { beta, hbar: 1.0 };
        for &(p, q) in &[(0.0, 1.0), (-0.5, 0.6), (0.9, 1.8)] {
            let num = fs_metric_numeric(&fam, p, q, DEFAULT_METRIC_STEP).unwrap();
            let exact = fs_metric_analytic(&params, p, q).unwrap();
            assert!(
                num.max_rel_diff(&exact) < 1e-6,
                "({p},{q}) {num:?} vs {exact:?}"
            );
        }
    }

    #[test]
    fn curvature_matches_hand_oracle() {
        for beta in [1.0, 2.0, 5.0] {
            let params = FamilyParams::Affine { beta, hbar: 1.0 };
            for q in [0.5, 1.0, 3.0] {
                let r = scalar_curvature(&params, 0.2, q).unwrap();
                let oracle =
                    2.0 * diagonal_q_only_curvature(|q| q * q / beta, |q| beta / (q * q), q);
                assert!((r - oracle).abs() < 1e-5);
                assert!((r + 2.0 / beta).abs() < 1e-6, "beta={beta} q={q} R={r}");
            }
        }
        let params = FamilyParams::Spin { s: 2.0, hbar: 1.0 };
        for p in [-1.0, 0.0, 0.7] {
            assert!((scalar_curvature(&params, p, 0.4).unwrap() - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn spin_metric_matches_sphere() {
        for s in [0.5, 1.0, 5.0] {
            let fam = SpinFamily::new(Arc::new(SpinRep::new(s, 1.0).unwrap())).unwrap();
            let params = FamilyParams::Spin { s, hbar: 1.0 };
            let r = fam.radius();
            for &(fp, fq) in &[(0.0, 0.0), (0.5, 1.0), (-0.6, -2.0)] {
                let (p, q) = (fp * r, fq * r);
                let num = fs_metric_numeric(&fam, p, q, DEFAULT_METRIC_STEP).unwrap();
                let exact = fs_metric_analytic(&params, p, q).unwrap();
                assert!(num.max_abs_diff(&exact) < 1e-7, "s={s} ({p},{q})");
            }
        }
    }

    struct Phased<'a>(&'a CanonicalFamily);

    impl StateMap for Phased<'_> {
        fn hbar(&self) -> f64 {
            self.0.hbar()
        }
        fn state(&self, p: f64, q: f64) -> Result<StateVector> {
            Ok(self.0.state(p, q)?.with_phase(p * q / (2.0 * self.hbar())))
        }
        fn check_interior(&self, _p: f64, _q: f64, _margin: f64) -> Result<()> {
            Ok(())
        }
    }

    #[test]
    fn metric_ignores_label_dependent_phase() {
        let fam = CanonicalFamily::new(Arc::new(LineRep::new(100, 1.0).unwrap()));
        for &(p, q) in &[(0.4, 0.9), (-1.5, 2.0)] {
            let a = fs_metric_numeric(&fam, p, q, DEFAULT_METRIC_STEP).unwrap();
            let b = fs_metric_numeric(&Phased(&fam), p, q, DEFAULT_METRIC_STEP).unwrap();
            assert!(a.max_abs_diff(&b) < 1e-8);
        }
    }

    #[test]
    fn richardson_order_at_least_two() {
        let fam = AffineFamily::with_auto_grid(2.0, 1.0).unwrap();
        // large steps so truncation error dominates round-off
        let est = fs_metric_numeric_detailed(&fam, 0.3, 1.2, 0.05).unwrap();
        assert!(est.observed_order >= 1.9, "order {}", est.observed_order);
        let spin = SpinFamily::new(Arc::new(SpinRep::new(1.0, 1.0).unwrap())).unwrap();
        let est = fs_metric_numeric_detailed(&spin, 0.3, 0.5, 0.05).unwrap();
        assert!(est.observed_order >= 1.9, "order {}", est.observed_order);
    }

    #[test]
    fn analytic_domain_errors() {
        let aff = FamilyParams::Affine {
            beta: 2.0,
            hbar: 1.0,
        };
        assert!(matches!(
            fs_metric_analytic(&aff, 0.0, -1.0),
            Err(EqError::DomainViolation(_))
        ));
        let spin = FamilyParams::Spin { s: 1.0, hbar: 1.0 };
        assert!(fs_metric_analytic(&spin, 1.0, 0.0).is_err());
        assert!(fs_metric_analytic(&spin, 1.5, 0.0).is_err());
    }

    #[test]
    fn numeric_metric_rejects_boundary_labels() {
        let spin = SpinFamily::new(Arc::new(SpinRep::new(1.0, 1.0).unwrap())).unwrap();
        assert!(fs_metric_numeric(&spin, 1.0, 0.0, 1e-4).is_err());
        assert!(fs_metric_numeric(&spin, 0.0, std::f64::consts::PI, 1e-4).is_err());
    }
}
