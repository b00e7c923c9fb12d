//! Acceptance suite: ten criteria, one PASS/FAIL line each.
//!
//! Reference values are computed here from closed forms or from quadratures
//! written independently of the library.

use std::f64::consts::PI;
use std::process::{Command, ExitCode};
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use eq_core::cli::{csv_body, run_experiment, ExperimentConfig};
use eq_core::coherent::CoherentFamily;
use eq_core::coherent::{
    fs_metric_numeric, scalar_curvature, AffineFamily, CanonicalFamily, FamilyParams, SpinFamily,
    StateMap, DEFAULT_METRIC_STEP,
};
use eq_core::correspondence::{classical_limit_with_tol, enhance, Hamiltonian, OperatorPolynomial};
use eq_core::dynamics::{
    action_stationarity, hamiltonian_flow_with, log_sweep, EventKind, FlowOptions, PhasePoint,
};
use eq_core::hilbert::{LineRep, SpinRep};
use eq_core::models::{harmonic_oscillator, min_radius, HydrogenModel, HydrogenParams};

struct Verdict {
    passed: bool,
    summary: String,
}

fn verdict(passed: bool, summary: impl Into<String>) -> Verdict {
    Verdict {
        passed,
        summary: summary.into(),
    }
}

type Outcome = Result<Verdict, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn e<E: std::fmt::Display>(err: E) -> String {
    err.to_string()
}

// ---------- independent numerics ----------

/// Composite Gauss–Legendre (5 points) on `[a, b]` with `n` panels.
fn gauss_legendre(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    const X: [f64; 5] = [
        0.0,
        -0.538_469_310_105_683_1,
        0.538_469_310_105_683_1,
        -0.906_179_845_938_664,
        0.906_179_845_938_664,
    ];
    const W: [f64; 5] = [
        0.568_888_888_888_888_9,
        0.478_628_670_499_366_5,
        0.478_628_670_499_366_5,
        0.236_926_885_056_189_1,
        0.236_926_885_056_189_1,
    ];
    let h = (b - a) / n as f64;
    (0..n)
        .map(|k| {
            let mid = a + (k as f64 + 0.5) * h;
            X.iter()
                .zip(W)
                .map(|(x, w)| w * f(mid + 0.5 * h * x))
                .sum::<f64>()
                * 0.5
                * h
        })
        .sum()
}

/// Moments of the affine fiducial `ψ(x) ∝ x^{a−1/2} e^{−a x}`, `a = β/ħ`,
/// by quadrature in `y = ln x`: returns `(⟨Q⟩, ⟨Q⁻¹⟩, ⟨P²⟩)`.
fn fiducial_quadrature(beta: f64, hbar: f64) -> (f64, f64, f64) {
    let a = beta / hbar;
    // log of |ψ|² x, peaked at y = ln(1) = 0
    let log_w = |y: f64| 2.0 * a * y - 2.0 * a * y.exp();
    let peak = log_w(0.0);
    let int = |g: &dyn Fn(f64) -> f64| {
        gauss_legendre(
            |y| (log_w(y) - peak).exp() * g(y.exp()),
            -60.0 / a.sqrt() - 20.0,
            8.0,
            4000,
        )
    };
    let norm = int(&|_| 1.0);
    let q = int(&|x| x) / norm;
    let inv = int(&|x| 1.0 / x) / norm;
    let dlog = |x: f64| (a - 0.5) / x - a;
    let p2 = hbar * hbar * int(&|x| dlog(x).powi(2)) / norm;
    (q, inv, p2)
}

/// Gaussian curvature of `E dp² + G dq²` (off-diagonal must vanish) from
/// central differences of a metric sampler, Richardson-refined.
fn orthogonal_curvature(
    metric: &dyn Fn(f64, f64) -> Result<(f64, f64, f64), String>,
    p: f64,
    q: f64,
    hp: f64,
    hq: f64,
) -> Result<f64, String> {
    let k_at = |hp: f64, hq: f64| -> Result<f64, String> {
        let w = |p: f64, q: f64| -> Result<(f64, f64, f64), String> {
            let (ee, _, gg) = metric(p, q)?;
            Ok((ee, gg, (ee * gg).sqrt()))
        };
        // G_p / √(EG) at p ± hp, E_q / √(EG) at q ± hq
        let gp_over_w = |p: f64| -> Result<f64, String> {
            let (_, g_plus, _) = w(p + hp, q)?;
            let (_, g_minus, _) = w(p - hp, q)?;
            Ok((g_plus - g_minus) / (2.0 * hp) / w(p, q)?.2)
        };
        let eq_over_w = |q: f64| -> Result<f64, String> {
            let (e_plus, _, _) = w(p, q + hq)?;
            let (e_minus, _, _) = w(p, q - hq)?;
            Ok((e_plus - e_minus) / (2.0 * hq) / w(p, q)?.2)
        };
        let d_p = (gp_over_w(p + hp)? - gp_over_w(p - hp)?) / (2.0 * hp);
        let d_q = (eq_over_w(q + hq)? - eq_over_w(q - hq)?) / (2.0 * hq);
        Ok(-(d_p + d_q) / (2.0 * w(p, q)?.2))
    };
    let k1 = k_at(hp, hq)?;
    let k2 = k_at(hp / 2.0, hq / 2.0)?;
    Ok((4.0 * k2 - k1) / 3.0)
}

fn numeric_metric<M: StateMap>(fam: &M, p: f64, q: f64) -> Result<(f64, f64, f64), String> {
    let g = fs_metric_numeric(fam, p, q, DEFAULT_METRIC_STEP).map_err(e)?;
    Ok((g.g_pp, g.g_pq, g.g_qq))
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
        .collect()
}

// ---------- criteria ----------

fn label_means() -> Outcome {
    let start = Instant::now();
    let fam = CanonicalFamily::new(Arc::new(LineRep::new(300, 1.0).map_err(e)?));
    let rep = fam.rep();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut mean, mut var): (f64, f64) = (0.0, 0.0);
    for _ in 0..50 {
        let p = rng.random_range(-3.0..=3.0);
        let q = rng.random_range(-3.0..=3.0);
        let st = fam.state(p, q).map_err(e)?;
        mean = mean
            .max((st.expectation(rep.p()).map_err(e)?.re - p).abs())
            .max((st.expectation(rep.q()).map_err(e)?.re - q).abs());
        var = var
            .max((st.variance(rep.p()).map_err(e)? - 0.5).abs())
            .max((st.variance(rep.q()).map_err(e)? - 0.5).abs());
    }
    let t = start.elapsed();
    Ok(verdict(
        mean < 1e-8 && var < 1e-8 && t < Duration::from_secs(10),
        format!(
            "max mean error {mean:.2e}, max variance error {var:.2e} (< 1e-8), {t:.2?} (< 10 s)"
        ),
    ))
}

fn flat_metric() -> Outcome {
    let start = Instant::now();
    let fam = CanonicalFamily::new(Arc::new(LineRep::new(200, 1.0).map_err(e)?));
    let mut worst: f64 = 0.0;
    for p in linspace(-2.0, 2.0, 5) {
        for q in linspace(-2.0, 2.0, 5) {
            let (gpp, gpq, gqq) = numeric_metric(&fam, p, q)?;
            worst = worst
                .max((gpp - 1.0).abs())
                .max(gpq.abs())
                .max((gqq - 1.0).abs());
        }
    }
    let t = start.elapsed();
    Ok(verdict(
        worst < 1e-6 && t < Duration::from_secs(30),
        format!("max |g - I| = {worst:.2e} (< 1e-6) on 5x5 grid, {t:.2?} (< 30 s)"),
    ))
}

fn affine_geometry() -> Outcome {
    let mut metric_err: f64 = 0.0;
    let mut curv_err: f64 = 0.0;
    let mut lib_err: f64 = 0.0;
    for beta in [1.0, 2.0, 5.0] {
        // the fiducial needs β > ħ; the metric itself does not depend on ħ
        let hbar = if beta > 1.0 { 1.0 } else { 0.5 };
        let fam = AffineFamily::with_auto_grid(beta, hbar).map_err(e)?;
        for p in linspace(-1.0, 1.0, 3) {
            for q in linspace(0.5, 2.0, 4) {
                let (gpp, gpq, gqq) = numeric_metric(&fam, p, q)?;
                let (epp, eqq) = (q * q / beta, beta / (q * q));
                metric_err = metric_err
                    .max(((gpp - epp) / epp).abs())
                    .max(((gqq - eqq) / eqq).abs())
                    .max(gpq.abs() / epp.max(eqq));
            }
        }
        let expected = -2.0 / beta;
        for (p, q) in [(0.0, 1.0), (0.5, 0.7), (-0.8, 1.6)] {
            let k =
                orthogonal_curvature(&|p, q| numeric_metric(&fam, p, q), p, q, 0.02 * q, 0.02 * q)?;
            curv_err = curv_err.max((2.0 * k - expected).abs());
            let r = scalar_curvature(&FamilyParams::Affine { beta, hbar }, p, q).map_err(e)?;
            lib_err = lib_err.max((r - expected).abs());
        }
    }
    Ok(verdict(
        metric_err < 1e-5 && curv_err < 1e-4 && lib_err < 1e-4,
        format!(
            "metric rel error {metric_err:.2e} (< 1e-5); R + 2/beta from numeric metric {curv_err:.2e}, library {lib_err:.2e} (< 1e-4), beta in {{1,2,5}}"
        ),
    ))
}

fn spin_geometry() -> Outcome {
    let mut metric_err: f64 = 0.0;
    let mut curv_err: f64 = 0.0;
    for s in [0.5, 1.0, 5.0] {
        let hbar = 1.0;
        let fam = SpinFamily::new(Arc::new(SpinRep::new(s, hbar).map_err(e)?)).map_err(e)?;
        let r = (s * hbar).sqrt();
        for p in [-0.6 * r, 0.0, 0.3 * r, 0.6 * r] {
            for q in [-2.0 * r, 0.4 * r, 2.5 * r] {
                let (gpp, gpq, gqq) = numeric_metric(&fam, p, q)?;
                let f = 1.0 - p * p / (s * hbar);
                metric_err = metric_err
                    .max((gpp - 1.0 / f).abs())
                    .max(gpq.abs())
                    .max((gqq - f).abs());
            }
        }
        for (p, q) in [(0.0, 0.0), (0.4 * r, 1.0)] {
            let k =
                orthogonal_curvature(&|p, q| numeric_metric(&fam, p, q), p, q, 0.01 * r, 0.01 * r)?;
            // sphere of radius r has K = 1/r²
            curv_err = curv_err.max((k * r * r - 1.0).abs());
        }
    }
    Ok(verdict(
        metric_err < 1e-6 && curv_err < 1e-4,
        format!("metric error {metric_err:.2e} (< 1e-6); |K r^2 - 1| = {curv_err:.2e}, s in {{1/2,1,5}}"),
    ))
}

fn fiducial_moments() -> Outcome {
    let (beta, hbar) = (2.0, 1.0);
    let fam = AffineFamily::with_auto_grid(beta, hbar).map_err(e)?;
    let rep = fam.rep();
    let q = fam.fiducial_moment(rep.q()).map_err(e)?;
    let d = fam.fiducial_moment(rep.d()).map_err(e)?;
    let (q_oracle, _, c2_oracle) = fiducial_quadrature(beta, hbar);
    let closed = beta * beta * hbar / (2.0 * (beta - hbar));
    let oracle_gap = (c2_oracle - closed).abs() / closed + (q_oracle - 1.0).abs();
    let c2_err = (fam.c2() - closed).abs() / closed;

    let mut ratios = Vec::new();
    for h in [1.0, 0.5, 0.25] {
        let f = AffineFamily::with_auto_grid(2.0 * h, h).map_err(e)?;
        ratios.push(f.c2() / (h * h));
    }
    let spread = ratios
        .iter()
        .map(|r| (r / ratios[0] - 1.0).abs())
        .fold(0.0, f64::max);
    Ok(verdict(
        (q - 1.0).abs() <= 1e-6 && d.abs() <= 1e-6 && c2_err < 1e-5 && spread < 1e-5 && oracle_gap < 1e-9,
        format!(
            "|<Q>-1| = {:.2e}, |<D>| = {:.2e} (<= 1e-6); C2 rel error {c2_err:.2e} (< 1e-5); C2/hbar^2 spread {spread:.2e} along beta = 2 hbar",
            (q - 1.0).abs(),
            d.abs()
        ),
    ))
}

fn weak_correspondence() -> Outcome {
    type Classical = fn(f64, f64) -> f64;
    let cases: [(&str, Classical); 5] = [
        ("P^2 + Q^2", |p, q| p * p + q * q),
        ("Q^3 + P*Q*P", |p, q| q.powi(3) + p * p * q),
        ("P^4", |p, _| p.powi(4)),
        ("Q^4 - 2*P^2", |p, q| q.powi(4) - 2.0 * p * p),
        ("P^2*Q^2 + Q^2*P^2", |p, q| 2.0 * p * p * q * q),
    ];
    let hbars = [1.0, 0.5, 0.25, 0.125, 0.0625];
    let labels = [(0.5, -1.0), (1.2, 0.7), (-0.3, 0.2)];
    let (mut worst, mut resid): (f64, f64) = (0.0, 0.0);
    let mut min_power = u32::MAX;
    for (text, classical) in cases {
        let poly = OperatorPolynomial::parse(text).map_err(e)?;
        if poly.degree() > 4 {
            return Err(format!("{text} has degree {}", poly.degree()));
        }
        for (p, q) in labels {
            let builder = |hbar: f64| {
                let fam = CoherentFamily::build(FamilyParams::Canonical { hbar }, 60)?;
                enhance(&poly, &fam)
            };
            let lim = classical_limit_with_tol(builder, p, q, &hbars, 1e-6).map_err(e)?;
            worst = worst.max((lim.limit - classical(p, q)).abs());
            resid = resid.max(lim.residual);
            min_power = min_power.min(
                lim.leading_power
                    .ok_or(format!("{text}: no hbar dependence"))?,
            );
        }
    }
    Ok(verdict(
        worst <= 1e-6 && resid <= 1e-6 && min_power >= 1,
        format!("max |limit - classical| = {worst:.2e}, fit residual {resid:.2e} (<= 1e-6), min leading power {min_power} (>= 1)"),
    ))
}

fn hydrogen_contrast() -> Outcome {
    let start = Instant::now();
    let params = HydrogenParams::default();
    let (m, e2, beta, hbar) = (params.m, params.e2, params.beta, params.hbar);
    let model = HydrogenModel::new(params).map_err(e)?;
    let opts = FlowOptions::default();
    let x0 = PhasePoint::at_origin(0.0, 1.0);

    // radial fall from rest at q0 with E = −e²/q0; q = q0 sin²u gives
    // t = √(2m q0³/e²) ∫₀^{π/2} sin²u du
    let q0 = x0.q;
    let t_oracle =
        (2.0 * m * q0.powi(3) / e2).sqrt() * gauss_legendre(|u| u.sin().powi(2), 0.0, PI / 2.0, 50);
    let classical = hamiltonian_flow_with(&model.classical(), x0, 100.0, &opts).map_err(e)?;
    let t_hit = classical
        .first_event(EventKind::SingularityHit)
        .map(|ev| ev.t)
        .ok_or("classical flow did not collapse")?;
    let t_err = (t_hit - t_oracle).abs() / t_oracle;

    // C₁, C₂ from an independent quadrature of the fiducial
    let (_, inv, p2) = fiducial_quadrature(beta, hbar);
    let (c1, c2) = (e2 * inv, p2);
    let mut radius_err: f64 = 0.0;
    let mut singular = false;
    let horizon = 10.0 * t_hit;
    let enhanced = model.enhanced();
    for start_q in [1.0, 2.0] {
        let x = PhasePoint::at_origin(0.0, start_q);
        let energy = -c1 / start_q + c2 / (2.0 * m * start_q * start_q);
        // smaller root of E q² + C₁ q − C₂/(2m) = 0
        let disc = c1 * c1 + 2.0 * energy * c2 / m;
        let q_oracle = (-c1 + disc.sqrt()) / (2.0 * energy);
        let tr = hamiltonian_flow_with(&enhanced, x, horizon, &opts).map_err(e)?;
        singular |= tr.has_event(EventKind::SingularityHit) || tr.last().t < horizon;
        let lib_radius =
            min_radius(&enhanced, enhanced.value(0.0, start_q).map_err(e)?).map_err(e)?;
        radius_err = radius_err
            .max((tr.min_q() - lib_radius).abs())
            .max((lib_radius - q_oracle).abs());
    }
    let t = start.elapsed();
    Ok(verdict(
        t_err < 1e-4 && !singular && radius_err < 1e-6 && t < Duration::from_secs(60),
        format!(
            "collapse at t = {t_hit:.10} vs oracle {t_oracle:.10} (rel {t_err:.1e} < 1e-4); enhanced singular: {singular}; |min q - q_min| = {radius_err:.1e} (< 1e-6); {t:.2?}"
        ),
    ))
}

fn transform_run(
    model: &str,
    transform: &str,
    q0: f64,
) -> Result<serde_json::Map<String, serde_json::Value>, String> {
    let text = format!(
        r#"{{"experiment": {{"kind": "transform_check", "model": {model}, "transform": {transform},
            "initial": {{"p": 0.0, "q": {q0}}}, "duration": 80.0, "close_orbit": true, "tolerance": 1e-6}}}}"#
    );
    let cfg = ExperimentConfig::from_json(&text).map_err(e)?;
    cfg.validate().map_err(e)?;
    let out = run_experiment(&cfg).map_err(e)?;
    let mut summary = out.summary.clone();
    summary.insert(
        "checks".into(),
        serde_json::to_value(&out.checks).map_err(e)?,
    );
    summary.insert("passed".into(), out.passed().into());
    Ok(summary)
}

fn transform_equivariance() -> Outcome {
    let harmonic = r#"{"type": "harmonic", "m": 1, "omega": 1, "hbar": 1}"#;
    let hydrogen = r#"{"type": "hydrogen_enhanced"}"#;
    // closed orbits: harmonic from (0,1) encloses π; hydrogen from (0,2) has
    // E = −5/12 and turning points 1.2, 2
    let (e_h, c1, c2): (f64, f64, f64) = (-5.0 / 12.0, 4.0 / 3.0, 2.0);
    let (q1, q2) = (1.2, 2.0);
    let (mid, half) = ((q1 + q2) / 2.0, (q2 - q1) / 2.0);
    // ∮ p dq = 2 ∫ √(−2E (q−q1)(q2−q))/q dq with q = mid − half·cos θ
    let hydrogen_loop = 2.0
        * (-2.0 * e_h).sqrt()
        * gauss_legendre(
            |t| half * half * t.sin().powi(2) / (mid - half * t.cos()),
            0.0,
            PI,
            200,
        );
    // Kepler radial action 2π(C₁/√(−2E) − √C₂) as a cross-check of the quadrature
    let kepler = 2.0 * PI * (c1 / (-2.0 * e_h).sqrt() - c2.sqrt());
    if (hydrogen_loop - kepler).abs() > 1e-9 {
        return Err(format!(
            "loop oracles disagree: {hydrogen_loop} vs {kepler}"
        ));
    }

    let mut lines = Vec::new();
    let mut ok = true;
    for (model, q0, loop_oracle) in [(harmonic, 1.0, PI), (hydrogen, 2.0, hydrogen_loop)] {
        for tr in [
            r#"{"type": "rotation"}"#,
            r#"{"type": "scaling", "lambda": 1.7}"#,
        ] {
            let s = transform_run(model, tr, q0)?;
            let checks = s["checks"].as_array().ok_or("missing checks")?;
            let measured = |name: &str| {
                checks
                    .iter()
                    .find(|c| c["name"] == name)
                    .and_then(|c| c["measured"].as_f64())
                    .unwrap_or(f64::INFINITY)
            };
            let eqv = measured("equivariance");
            let loops = measured("loop_integrals");
            let loop_value = s["loop_integral"].as_f64().unwrap_or(f64::NAN);
            let oracle_gap = (loop_value.abs() - loop_oracle).abs();
            ok &= s["passed"] == true && eqv <= 1e-6 && loops <= 1e-6 && oracle_gap <= 1e-6;
            lines.push(format!("{eqv:.1e}/{loops:.1e}/{oracle_gap:.1e}"));
        }
    }
    Ok(verdict(
        ok,
        format!(
            "equivariance/loop difference/loop vs oracle (<= 1e-6): harmonic rot {}, harmonic scale {}, hydrogen rot {}, hydrogen scale {}",
            lines[0], lines[1], lines[2], lines[3]
        ),
    ))
}

fn action_stationarity_slope() -> Outcome {
    let h = harmonic_oscillator(1.0, 1.0, 1.0).map_err(e)?;
    let opts = FlowOptions {
        output_interval: Some(2.0 * PI / 400.0),
        ..FlowOptions::default()
    };
    let tr =
        hamiltonian_flow_with(&h, PhasePoint::at_origin(0.0, 1.0), 2.0 * PI, &opts).map_err(e)?;
    let report = action_stationarity(&h, &tr, &log_sweep(1e-4, 1e-2, 9)).map_err(e)?;
    Ok(verdict(
        report.slope >= 1.9,
        format!(
            "log-log slope {:.4} (>= 1.9) over eps in [1e-4, 1e-2]",
            report.slope
        ),
    ))
}

fn determinism() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_eq");
    let root = concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs");
    let mut compared = 0;
    for cfg in [
        "compare_hydrogen.json",
        "metric_canonical.json",
        "transform_rotation.json",
    ] {
        let path = format!("{root}/{cfg}");
        let mut bodies = Vec::new();
        for stamp in ["1", "2"] {
            let dir = tempfile::tempdir().map_err(e)?;
            let status = Command::new(bin)
                .args(["run", "--config", &path, "--out"])
                .arg(dir.path())
                .args(["--stamp", stamp])
                .output()
                .map_err(e)?;
            if !status.status.success() {
                return Err(format!(
                    "{cfg}: {}",
                    String::from_utf8_lossy(&status.stderr)
                ));
            }
            let mut files: Vec<_> = std::fs::read_dir(dir.path())
                .map_err(e)?
                .filter_map(|d| d.ok().map(|d| d.path()))
                .filter(|p| p.extension().is_some_and(|x| x == "csv"))
                .collect();
            files.sort();
            let mut all = String::new();
            for f in files {
                all.push_str(&csv_body(&std::fs::read_to_string(&f).map_err(e)?));
            }
            bodies.push(all);
        }
        if bodies[0].is_empty() || bodies[0] != bodies[1] {
            return Ok(verdict(false, format!("{cfg}: CSV bodies differ")));
        }
        compared += 1;
    }
    Ok(verdict(
        true,
        format!("{compared} configs, CSV bodies byte-identical across runs"),
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("label means", label_means),
        ("flat FS metric", flat_metric),
        ("affine metric and curvature", affine_geometry),
        ("spin metric", spin_geometry),
        ("affine fiducial moments", fiducial_moments),
        ("weak correspondence", weak_correspondence),
        ("hydrogen contrast", hydrogen_contrast),
        ("transform equivariance", transform_equivariance),
        ("action stationarity", action_stationarity_slope),
        ("determinism", determinism),
    ];
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let v = run().unwrap_or_else(|err| verdict(false, format!("error: {err}")));
        if !v.passed {
            failures += 1;
        }
        println!(
            "{} {:>2} {name}: {}",
            if v.passed { "PASS" } else { "FAIL" },
            i + 1,
            v.summary
        );
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failures,
        criteria.len()
    );
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
