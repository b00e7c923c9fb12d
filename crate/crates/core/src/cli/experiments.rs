//! The seven experiments behind `eq run` and the suites behind `eq verify`.

use std::fmt::Write as _;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::cli::config::*;
use crate::cli::report::{Check, Outcome, OutputFile};
use crate::coherent::affine::{c2_closed_form, inverse_moment_closed_form};
use crate::coherent::{
    fs_metric_analytic, fs_metric_numeric_detailed, scalar_curvature, AffineFamily,
    CanonicalFamily, CoherentFamily, FamilyParams, MetricTensor2,
};
use crate::correspondence::{
    classical_limit_with_tol, enhance, EnhancedHamiltonian, Hamiltonian, OperatorPolynomial,
};
use crate::dynamics::{
    apply_transform, hamiltonian_flow_with, loop_integral, restricted_action_value,
    verify_transform_action, ActionCheck, CanonicalTransform, EventKind, Relabel, Trajectory,
    TransformedHamiltonian,
};
use crate::error::{EqError, Result};
use crate::hilbert::LineRep;
use crate::models::{harmonic_oscillator, min_radius, spin_precession, HydrogenModel};

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Outcome> {
    let format = cfg.output.format;
    match &cfg.experiment {
        Experiment::Expectation(s) => expectation(s),
        Experiment::Metric(s) => metric(s),
        Experiment::Curvature(s) => curvature(s),
        Experiment::Evolve(s) => evolve(s, format),
        Experiment::CompareHydrogen(s) => compare_hydrogen(s, format),
        Experiment::TransformCheck(s) => transform_check(s, format),
        Experiment::LimitStudy(s) => limit_study(s),
    }
}

pub fn build_model(spec: &ModelSpec) -> Result<Arc<dyn Hamiltonian>> {
    Ok(match spec {
        ModelSpec::Harmonic { m, omega, hbar } => Arc::new(harmonic_oscillator(*m, *omega, *hbar)?),
        ModelSpec::HydrogenClassical { params } => {
            Arc::new(HydrogenModel::new(*params)?.classical())
        }
        ModelSpec::HydrogenEnhanced { params } => Arc::new(HydrogenModel::new(*params)?.enhanced()),
        ModelSpec::SpinPrecession { b, s, hbar } => Arc::new(spin_precession(*b, *s, *hbar)?),
        ModelSpec::Polynomial {
            polynomial,
            family,
            line_dim,
        } => {
            let fam = CoherentFamily::build(*family, *line_dim)?;
            Arc::new(enhance(&OperatorPolynomial::parse(polynomial)?, &fam)?)
        }
    })
}

/// Closed-form scalar curvature of each family: `0`, `−2/β`, `2/(sħ)`.
pub fn expected_curvature(f: &FamilyParams) -> f64 {
    match *f {
        FamilyParams::Canonical { .. } | FamilyParams::Extended { .. } => 0.0,
        FamilyParams::Affine { beta, .. } => -2.0 / beta,
        FamilyParams::Spin { s, hbar } => 2.0 / (s * hbar),
    }
}

fn expectation(s: &ExpectationSpec) -> Result<Outcome> {
    let fam = CoherentFamily::build(s.family, s.line_dim)?;
    let poly = OperatorPolynomial::parse(&s.polynomial)?;
    let h = enhance(&poly, &fam)?;
    let mut csv = String::from("p,q,H,H_classical\n");
    for (p, q) in s.labels.points() {
        let v = h.value(p, q)?;
        let c = poly.classical_value(p, q)?;
        let _ = writeln!(csv, "{p:?},{q:?},{v:?},{c:?}");
    }
    let mut out = Outcome::default();
    out.files.push(OutputFile::csv("expectation.csv", csv));
    out.note("polynomial", poly.to_string())?;
    out.note("provenance", h.provenance())?;
    if let Some(l) = h.laurent() {
        out.note("closed_form", l.to_string())?;
    }
    Ok(out)
}

fn metric(s: &MetricSpec) -> Result<Outcome> {
    let fam = CoherentFamily::build(s.family, s.line_dim)?;
    let mut csv = String::from("p,q,g_pp,g_pq,g_qq\n");
    let mut worst: f64 = 0.0;
    let mut min_order = f64::INFINITY;
    for (p, q) in s.labels.points() {
        let est = fs_metric_numeric_detailed(&fam, p, q, s.step)?;
        let exact = fs_metric_analytic(&s.family, p, q)?;
        worst = worst.max(est.metric.max_rel_diff(&exact));
        min_order = min_order.min(est.observed_order);
        let MetricTensor2 { g_pp, g_pq, g_qq } = est.metric;
        let _ = writeln!(csv, "{p:?},{q:?},{g_pp:?},{g_pq:?},{g_qq:?}");
    }
    let mut out = Outcome::default();
    out.files.push(OutputFile::csv("metric.csv", csv));
    out.checks
        .push(Check::at_most("metric_vs_closed_form", worst, s.tolerance));
    out.note(
        "min_observed_order",
        if min_order.is_finite() {
            json!(min_order)
        } else {
            json!("round-off")
        },
    )?;
    Ok(out)
}

fn curvature(s: &CurvatureSpec) -> Result<Outcome> {
    let expected = expected_curvature(&s.family);
    let mut csv = String::from("p,q,R,R_expected\n");
    let mut worst: f64 = 0.0;
    for (p, q) in s.labels.points() {
        let r = scalar_curvature(&s.family, p, q)?;
        worst = worst.max((r - expected).abs());
        let _ = writeln!(csv, "{p:?},{q:?},{r:?},{expected:?}");
    }
    let mut out = Outcome::default();
    out.files.push(OutputFile::csv("curvature.csv", csv));
    out.checks
        .push(Check::at_most("curvature_vs_constant", worst, s.tolerance));
    out.note("expected", expected)?;
    Ok(out)
}

fn trajectory_summary(tr: &Trajectory) -> serde_json::Value {
    json!({
        "termination": tr.termination,
        "samples": tr.len(),
        "events": tr.events,
        "final_time": tr.last().t,
        "min_q": tr.min_q(),
        "max_relative_energy_drift": tr.max_relative_energy_drift(),
    })
}

fn evolve(s: &EvolveSpec, format: Format) -> Result<Outcome> {
    let h = build_model(&s.model)?;
    let tr = hamiltonian_flow_with(&*h, s.initial.point(), s.duration, &s.flow)?;
    let mut out = Outcome::default();
    out.files
        .push(OutputFile::trajectory("trajectory", &tr, format)?);
    out.note("trajectory", trajectory_summary(&tr))?;
    let bound = s.drift_tolerance.unwrap_or(10.0 * s.flow.tol);
    out.checks.push(Check::at_most(
        "energy_drift",
        tr.max_relative_energy_drift(),
        bound,
    ));
    if s.action {
        out.note("action", restricted_action_value(&*h, &tr)?)?;
    }
    Ok(out)
}

/// Classical and enhanced hydrogen from the same initial label.
pub fn compare_hydrogen(s: &CompareHydrogenSpec, format: Format) -> Result<Outcome> {
    let model = HydrogenModel::new(s.hydrogen)?;
    let (hc, he) = (model.classical(), model.enhanced());
    let x0 = s.initial.point();
    let classical = hamiltonian_flow_with(&hc, x0, s.classical_horizon, &s.flow)?;
    let collapse = classical
        .first_event(EventKind::SingularityHit)
        .map(|e| e.t);
    let horizon = s.horizon_factor * collapse.unwrap_or(s.classical_horizon);
    let enhanced = hamiltonian_flow_with(&he, x0, horizon, &s.flow)?;
    let energy = he.value(x0.p, x0.q)?;
    let radius = min_radius(&he, energy)?;
    let q_min = enhanced.min_q();

    let mut out = Outcome::default();
    out.files
        .push(OutputFile::trajectory("classical", &classical, format)?);
    out.files
        .push(OutputFile::trajectory("enhanced", &enhanced, format)?);
    out.checks.push(Check::flag(
        "classical_singularity_hit",
        collapse.is_some(),
        collapse.map_or("no collapse within the classical horizon".into(), |t| {
            format!("t = {t:?}")
        }),
    ));
    out.checks.push(Check::flag(
        "enhanced_no_singularity",
        !enhanced.has_event(EventKind::SingularityHit) && enhanced.last().t >= horizon,
        format!("horizon {horizon:?}"),
    ));
    out.checks.push(Check::at_most(
        "enhanced_min_q_vs_min_radius",
        (q_min - radius).abs(),
        s.tolerance,
    ));
    out.note("collapse_time", collapse)?;
    out.note("enhanced_horizon", horizon)?;
    out.note("energy", energy)?;
    out.note("q_min", q_min)?;
    out.note("min_radius", radius)?;
    out.note("c1", model.c1())?;
    out.note("c2", model.c2())?;
    out.note("bohr_ratio", model.bohr_ratio())?;
    out.note("bounces", enhanced.events_of(EventKind::Bounce).count())?;
    out.note("classical", trajectory_summary(&classical))?;
    out.note("enhanced", trajectory_summary(&enhanced))?;
    Ok(out)
}

fn build_transform(kind: TransformKind) -> Result<CanonicalTransform> {
    match kind {
        TransformKind::Identity => Ok(CanonicalTransform::identity()),
        TransformKind::Rotation => Ok(CanonicalTransform::rotation()),
        TransformKind::Scaling { lambda } => CanonicalTransform::scaling(lambda),
    }
}

/// Largest `|Δp|, |Δq|` between two runs at the uniform output times they share.
pub fn grid_deviation(a: &Trajectory, b: &Trajectory, dt: f64) -> Result<f64> {
    let on_grid = |tr: &Trajectory| {
        let t0 = tr.first().t;
        let end = tr.last().t;
        tr.samples
            .iter()
            .filter(move |s| {
                let k = (s.t - t0) / dt;
                (k - k.round()).abs() < 1e-9 || s.t == end
            })
            .copied()
            .collect::<Vec<_>>()
    };
    let (sa, sb) = (on_grid(a), on_grid(b));
    if sa.len() != sb.len() {
        return Err(EqError::numerical(
            "runs do not share a uniform output grid",
            vec![sa.len() as f64, sb.len() as f64],
        ));
    }
    let mut worst: f64 = 0.0;
    for (x, y) in sa.iter().zip(&sb) {
        if (x.t - y.t).abs() > 1e-9 * dt {
            return Err(EqError::numerical(
                "output times differ between runs",
                vec![x.t, y.t],
            ));
        }
        worst = worst.max((x.p - y.p).abs()).max((x.q - y.q).abs());
    }
    Ok(worst)
}

fn transform_check(s: &TransformSpec, format: Format) -> Result<Outcome> {
    let h = build_model(&s.model)?;
    let tr = build_transform(s.transform)?;
    let x0 = s.initial.point();
    let mut duration = s.duration;
    let mut closed = false;
    if s.close_orbit {
        let probe = hamiltonian_flow_with(&*h, x0, s.duration, &s.flow)?;
        let bounces: Vec<f64> = probe.events_of(EventKind::Bounce).map(|e| e.t).collect();
        if bounces.len() < 2 {
            return Err(EqError::numerical(
                "fewer than two bounces within the horizon; cannot close the orbit",
                vec![s.duration, bounces.len() as f64],
            ));
        }
        duration = bounces[1] - bounces[0];
        closed = true;
    }
    let original = hamiltonian_flow_with(&*h, x0, duration, &s.flow)?;
    let ht = TransformedHamiltonian::new(h.clone(), tr.clone());
    let transformed = hamiltonian_flow_with(&ht, x0.relabel(&tr)?, duration, &s.flow)?;
    let mapped = apply_transform(&tr, &original)?;
    let dt = s.flow.output_interval.unwrap_or(duration);
    let deviation = grid_deviation(&mapped, &transformed, dt)?;
    let report = verify_transform_action(&tr, &original, s.tolerance)?;

    let mut out = Outcome::default();
    out.files
        .push(OutputFile::trajectory("original", &original, format)?);
    out.files
        .push(OutputFile::trajectory("mapped", &mapped, format)?);
    out.files
        .push(OutputFile::trajectory("transformed", &transformed, format)?);
    out.checks
        .push(Check::at_most("equivariance", deviation, s.tolerance));
    if report.check != ActionCheck::NotApplicable {
        out.checks.push(
            Check::at_most("action_difference", report.discrepancy, s.tolerance)
                .with_detail(format!("{:?}", report.check)),
        );
    }
    let (a, b) = (original.first(), original.last());
    let gap = (b.p - a.p).hypot(b.q - a.q);
    if closed || gap <= s.tolerance {
        let lhs = loop_integral(&original)?;
        let rhs = loop_integral(&transformed)?;
        out.checks.push(
            Check::at_most("loop_integrals", (lhs - rhs).abs(), s.tolerance)
                .with_detail(format!("closure gap {gap:e}")),
        );
        out.note("loop_integral", lhs)?;
    }
    out.note("duration", duration)?;
    out.note("action_report", report)?;
    Ok(out)
}

pub fn canonical_builder(
    line_dim: usize,
    poly: OperatorPolynomial,
) -> impl FnMut(f64) -> Result<EnhancedHamiltonian> {
    move |hbar| {
        let fam = CoherentFamily::build(FamilyParams::Canonical { hbar }, line_dim)?;
        enhance(&poly, &fam)
    }
}

fn limit_rows(
    polynomials: &[String],
    labels: &[Label],
    hbars: &[f64],
    line_dim: usize,
    tolerance: f64,
    out: &mut Outcome,
) -> Result<String> {
    let mut csv = String::from("polynomial,p,q,limit,classical,slope,leading_power,residual\n");
    let mut worst: f64 = 0.0;
    let mut powers_ok = true;
    for text in polynomials {
        let poly = OperatorPolynomial::parse(text)?;
        for l in labels {
            let r = classical_limit_with_tol(
                canonical_builder(line_dim, poly.clone()),
                l.p,
                l.q,
                hbars,
                tolerance,
            )?;
            let c = poly.classical_value(l.p, l.q)?;
            worst = worst.max((r.limit - c).abs());
            powers_ok &= r.leading_power.is_none_or(|k| k >= 1);
            let power = r
                .leading_power
                .map_or("none".to_string(), |k| k.to_string());
            let _ = writeln!(
                csv,
                "\"{poly}\",{:?},{:?},{:?},{c:?},{:?},{power},{:?}",
                l.p, l.q, r.limit, r.slope, r.residual
            );
        }
    }
    out.checks
        .push(Check::at_most("limit_vs_classical", worst, tolerance));
    out.checks
        .push(Check::flag("leading_power_at_least_one", powers_ok, ""));
    Ok(csv)
}

fn limit_study(s: &LimitSpec) -> Result<Outcome> {
    let mut out = Outcome::default();
    let csv = limit_rows(
        &s.polynomials,
        &s.labels,
        &s.hbars,
        s.line_dim,
        s.tolerance,
        &mut out,
    )?;
    out.files.push(OutputFile::csv("limit.csv", csv));
    Ok(out)
}

/// Checks of one verification suite.
pub fn run_suite(suite: &Suite) -> Result<Vec<Check>> {
    match suite {
        Suite::FiducialMoments {
            beta,
            hbar,
            tolerance,
            c2_tolerance,
        } => {
            let fam = AffineFamily::with_auto_grid(*beta, *hbar)?;
            let q = fam.fiducial_moment(fam.rep().q())?;
            let d = fam.fiducial_moment(fam.rep().d())?;
            let c2 = c2_closed_form(*beta, *hbar)?;
            let inv = inverse_moment_closed_form(*beta, *hbar);
            Ok(vec![
                Check::at_most("<Q> = 1", (q - 1.0).abs(), *tolerance),
                Check::at_most("<D> = 0", d.abs(), *tolerance),
                Check::at_most(
                    "C2 relative error",
                    (fam.c2() - c2).abs() / c2,
                    *c2_tolerance,
                ),
                Check::at_most(
                    "<Q^-1> relative error",
                    (fam.inverse_moment() - inv).abs() / inv,
                    *c2_tolerance,
                ),
            ])
        }
        Suite::LabelMeans {
            hbar,
            dim,
            samples,
            radius,
            seed,
            tolerance,
        } => {
            let fam = CanonicalFamily::new(Arc::new(LineRep::new(*dim, *hbar)?));
            let rep = fam.rep();
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let (mut mean_err, mut var_err): (f64, f64) = (0.0, 0.0);
            for _ in 0..*samples {
                let p = rng.random_range(-*radius..=*radius);
                let q = rng.random_range(-*radius..=*radius);
                let st = fam.state(p, q)?;
                mean_err = mean_err
                    .max((st.expectation(rep.p())?.re - p).abs())
                    .max((st.expectation(rep.q())?.re - q).abs());
                var_err = var_err
                    .max((st.variance(rep.p())? - hbar / 2.0).abs())
                    .max((st.variance(rep.q())? - hbar / 2.0).abs());
            }
            Ok(vec![
                Check::at_most("label means", mean_err, *tolerance),
                Check::at_most("variances = hbar/2", var_err, *tolerance),
            ])
        }
        Suite::FlatMetric {
            hbar,
            line_dim,
            labels,
            tolerance,
        } => {
            let params = FamilyParams::Canonical { hbar: *hbar };
            let fam = CoherentFamily::build(params, *line_dim)?;
            let mut worst: f64 = 0.0;
            for (p, q) in labels.points() {
                let g =
                    fs_metric_numeric_detailed(&fam, p, q, crate::coherent::DEFAULT_METRIC_STEP)?
                        .metric;
                worst = worst.max(g.max_abs_diff(&MetricTensor2::identity()));
            }
            Ok(vec![Check::at_most("metric = identity", worst, *tolerance)])
        }
        Suite::Curvature {
            family,
            label,
            tolerance,
        } => {
            let r = scalar_curvature(family, label.p, label.q)?;
            let e = expected_curvature(family);
            Ok(vec![Check::at_most(
                "scalar curvature",
                (r - e).abs(),
                *tolerance,
            )
            .with_detail(format!("R = {r:?}, expected {e:?}"))])
        }
        Suite::EnergyDrift {
            model,
            initial,
            duration,
            flow,
            max_drift,
        } => {
            let h = build_model(model)?;
            let tr = hamiltonian_flow_with(&*h, initial.point(), *duration, flow)?;
            Ok(vec![Check::at_most(
                "max relative energy drift",
                tr.max_relative_energy_drift(),
                *max_drift,
            )])
        }
        Suite::HydrogenContrast { spec } => Ok(compare_hydrogen(spec, Format::Csv)?.checks),
        Suite::WeakCorrespondence {
            polynomials,
            labels,
            hbars,
            tolerance,
        } => {
            let mut out = Outcome::default();
            limit_rows(polynomials, labels, hbars, 40, *tolerance, &mut out)?;
            Ok(out.checks)
        }
    }
}
