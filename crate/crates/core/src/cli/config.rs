//! JSON configuration for `eq run` and `eq verify`.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::coherent::FamilyParams;
use crate::correspondence::OperatorPolynomial;
use crate::dynamics::{FlowOptions, PhasePoint};
use crate::error::{EqError, Result};
use crate::models::HydrogenParams;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    #[serde(default)]
    pub output: OutputSpec,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSpec {
    pub dir: Option<PathBuf>,
    pub format: Format,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Experiment {
    Expectation(ExpectationSpec),
    Metric(MetricSpec),
    Curvature(CurvatureSpec),
    Evolve(EvolveSpec),
    CompareHydrogen(CompareHydrogenSpec),
    TransformCheck(TransformSpec),
    LimitStudy(LimitSpec),
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Expectation(_) => "expectation",
            Experiment::Metric(_) => "metric",
            Experiment::Curvature(_) => "curvature",
            Experiment::Evolve(_) => "evolve",
            Experiment::CompareHydrogen(_) => "compare_hydrogen",
            Experiment::TransformCheck(_) => "transform_check",
            Experiment::LimitStudy(_) => "limit_study",
        }
    }
}

/// `n` evenly spaced values in `[min, max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Range {
    pub min: f64,
    pub max: f64,
    pub n: usize,
}

impl Range {
    pub fn validate(&self, field: &str) -> Result<()> {
        if !self.min.is_finite() || !self.max.is_finite() {
            return Err(EqError::config(field, "range bounds must be finite"));
        }
        if self.n == 0 || self.max < self.min {
            return Err(EqError::config(
                field,
                format!(
                    "empty range [{}, {}] with n = {}",
                    self.min, self.max, self.n
                ),
            ));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        if self.n == 1 {
            return vec![self.min];
        }
        let step = (self.max - self.min) / (self.n - 1) as f64;
        (0..self.n).map(|k| self.min + k as f64 * step).collect()
    }
}

/// Tensor grid of labels, `p` outer and `q` inner.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LabelGrid {
    pub p: Range,
    pub q: Range,
}

impl LabelGrid {
    pub fn validate(&self, field: &str) -> Result<()> {
        self.p.validate(&format!("{field}.p"))?;
        self.q.validate(&format!("{field}.q"))
    }

    pub fn points(&self) -> Vec<(f64, f64)> {
        let qs = self.q.values();
        self.p
            .values()
            .into_iter()
            .flat_map(|p| qs.iter().map(move |&q| (p, q)))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Label {
    pub p: f64,
    pub q: f64,
}

impl Label {
    pub fn validate(&self, field: &str) -> Result<()> {
        if !self.p.is_finite() || !self.q.is_finite() {
            return Err(EqError::config(field, "label components must be finite"));
        }
        Ok(())
    }

    pub fn point(&self) -> PhasePoint {
        PhasePoint::at_origin(self.p, self.q)
    }
}

fn default_line_dim() -> usize {
    200
}

fn validate_family(f: &FamilyParams, field: &str) -> Result<()> {
    f.validate()
        .map_err(|e| EqError::config(field, e.to_string()))
}

fn validate_line_dim(d: usize, field: &str) -> Result<()> {
    if d < 2 {
        return Err(EqError::config(field, "line_dim must be at least 2"));
    }
    Ok(())
}

fn validate_positive(v: f64, field: &str) -> Result<()> {
    if !(v > 0.0) || !v.is_finite() {
        return Err(EqError::config(field, format!("must be positive, got {v}")));
    }
    Ok(())
}

fn validate_flow(f: &FlowOptions, field: &str) -> Result<()> {
    f.validate()
        .map_err(|e| EqError::config(field, e.to_string()))
}

fn validate_polynomial(text: &str, field: &str) -> Result<()> {
    OperatorPolynomial::parse(text)
        .map(|_| ())
        .map_err(|e| EqError::config(field, e.to_string()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpectationSpec {
    pub family: FamilyParams,
    #[serde(default = "default_line_dim")]
    pub line_dim: usize,
    pub polynomial: String,
    pub labels: LabelGrid,
}

fn default_metric_step() -> f64 {
    crate::coherent::DEFAULT_METRIC_STEP
}

fn default_metric_tol() -> f64 {
    1e-6
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricSpec {
    pub family: FamilyParams,
    #[serde(default = "default_line_dim")]
    pub line_dim: usize,
    pub labels: LabelGrid,
    #[serde(default = "default_metric_step")]
    pub step: f64,
    /// Largest relative deviation from the closed-form metric.
    #[serde(default = "default_metric_tol")]
    pub tolerance: f64,
}

fn default_curvature_tol() -> f64 {
    1e-4
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurvatureSpec {
    pub family: FamilyParams,
    pub labels: LabelGrid,
    #[serde(default = "default_curvature_tol")]
    pub tolerance: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    Harmonic {
        #[serde(default = "one")]
        m: f64,
        #[serde(default = "one")]
        omega: f64,
        #[serde(default = "one")]
        hbar: f64,
    },
    HydrogenClassical {
        #[serde(default)]
        params: HydrogenParams,
    },
    HydrogenEnhanced {
        #[serde(default)]
        params: HydrogenParams,
    },
    SpinPrecession {
        b: f64,
        s: f64,
        #[serde(default = "one")]
        hbar: f64,
    },
    /// Enhancement of an operator polynomial in a coherent-state family.
    Polynomial {
        polynomial: String,
        family: FamilyParams,
        #[serde(default = "default_line_dim")]
        line_dim: usize,
    },
}

impl Default for ModelSpec {
    fn default() -> Self {
        ModelSpec::Harmonic {
            m: 1.0,
            omega: 1.0,
            hbar: 1.0,
        }
    }
}

impl ModelSpec {
    pub fn validate(&self, field: &str) -> Result<()> {
        let wrap = |r: Result<()>| r.map_err(|e| EqError::config(field, e.to_string()));
        match self {
            ModelSpec::Harmonic { m, omega, hbar } => {
                validate_positive(*m, &format!("{field}.m"))?;
                validate_positive(*omega, &format!("{field}.omega"))?;
                validate_positive(*hbar, &format!("{field}.hbar"))
            }
            ModelSpec::HydrogenClassical { params } | ModelSpec::HydrogenEnhanced { params } => {
                wrap(params.validate())
            }
            ModelSpec::SpinPrecession { b, s, hbar } => {
                if !b.is_finite() {
                    return Err(EqError::config(format!("{field}.b"), "must be finite"));
                }
                validate_family(&FamilyParams::Spin { s: *s, hbar: *hbar }, field)
            }
            ModelSpec::Polynomial {
                polynomial,
                family,
                line_dim,
            } => {
                validate_polynomial(polynomial, &format!("{field}.polynomial"))?;
                validate_family(family, &format!("{field}.family"))?;
                validate_line_dim(*line_dim, &format!("{field}.line_dim"))
            }
        }
    }
}

fn default_initial() -> Label {
    Label { p: 0.0, q: 1.0 }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolveSpec {
    #[serde(default)]
    pub model: ModelSpec,
    #[serde(default = "default_initial")]
    pub initial: Label,
    pub duration: f64,
    #[serde(default)]
    pub flow: FlowOptions,
    /// Largest accepted relative energy drift; `10·tol` when absent.
    #[serde(default)]
    pub drift_tolerance: Option<f64>,
    /// Also report the restricted action along the run.
    #[serde(default)]
    pub action: bool,
}

fn default_horizon_factor() -> f64 {
    10.0
}

fn default_classical_horizon() -> f64 {
    100.0
}

fn default_radius_tol() -> f64 {
    1e-6
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareHydrogenSpec {
    #[serde(default)]
    pub hydrogen: HydrogenParams,
    #[serde(default = "default_initial")]
    pub initial: Label,
    /// Horizon of the classical run, long enough to reach the collapse.
    #[serde(default = "default_classical_horizon")]
    pub classical_horizon: f64,
    /// Enhanced horizon as a multiple of the classical collapse time.
    #[serde(default = "default_horizon_factor")]
    pub horizon_factor: f64,
    #[serde(default)]
    pub flow: FlowOptions,
    #[serde(default = "default_radius_tol")]
    pub tolerance: f64,
}

impl Default for CompareHydrogenSpec {
    fn default() -> Self {
        Self {
            hydrogen: HydrogenParams::default(),
            initial: default_initial(),
            classical_horizon: default_classical_horizon(),
            horizon_factor: default_horizon_factor(),
            flow: FlowOptions::default(),
            tolerance: default_radius_tol(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum TransformKind {
    Identity,
    Rotation,
    Scaling { lambda: f64 },
}

fn dense_flow() -> FlowOptions {
    FlowOptions {
        output_interval: Some(0.01),
        ..FlowOptions::default()
    }
}

fn default_transform_tol() -> f64 {
    1e-6
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransformSpec {
    #[serde(default)]
    pub model: ModelSpec,
    pub transform: TransformKind,
    #[serde(default = "default_initial")]
    pub initial: Label,
    pub duration: f64,
    #[serde(default = "dense_flow")]
    pub flow: FlowOptions,
    #[serde(default = "default_transform_tol")]
    pub tolerance: f64,
    /// Replace `duration` by one period: the time between the first two bounces within it.
    #[serde(default)]
    pub close_orbit: bool,
}

fn default_hbars() -> Vec<f64> {
    vec![1.0, 0.5, 0.25, 0.125, 0.0625]
}

fn default_limit_line_dim() -> usize {
    40
}

fn default_fit_tol() -> f64 {
    crate::correspondence::limit::DEFAULT_FIT_TOL
}

/// `ħ → 0` study in the canonical family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LimitSpec {
    pub polynomials: Vec<String>,
    pub labels: Vec<Label>,
    #[serde(default = "default_hbars")]
    pub hbars: Vec<f64>,
    #[serde(default = "default_limit_line_dim")]
    pub line_dim: usize,
    #[serde(default = "default_fit_tol")]
    pub tolerance: f64,
}

impl ExperimentConfig {
    /// Parses and validates; line and column accompany syntax errors.
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| {
            EqError::config(
                format!("line {}, column {}", e.line(), e.column()),
                e.to_string(),
            )
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let f = "experiment";
        match &self.experiment {
            Experiment::Expectation(s) => {
                validate_family(&s.family, &format!("{f}.family"))?;
                validate_line_dim(s.line_dim, &format!("{f}.line_dim"))?;
                validate_polynomial(&s.polynomial, &format!("{f}.polynomial"))?;
                s.labels.validate(&format!("{f}.labels"))
            }
            Experiment::Metric(s) => {
                validate_family(&s.family, &format!("{f}.family"))?;
                validate_line_dim(s.line_dim, &format!("{f}.line_dim"))?;
                validate_positive(s.step, &format!("{f}.step"))?;
                validate_positive(s.tolerance, &format!("{f}.tolerance"))?;
                s.labels.validate(&format!("{f}.labels"))
            }
            Experiment::Curvature(s) => {
                // the closed-form metric needs only a positive beta
                if let FamilyParams::Affine { beta, hbar } = s.family {
                    validate_positive(beta, &format!("{f}.family.beta"))?;
                    validate_positive(hbar, &format!("{f}.family.hbar"))?;
                } else {
                    validate_family(&s.family, &format!("{f}.family"))?;
                }
                validate_positive(s.tolerance, &format!("{f}.tolerance"))?;
                s.labels.validate(&format!("{f}.labels"))
            }
            Experiment::Evolve(s) => {
                s.model.validate(&format!("{f}.model"))?;
                s.initial.validate(&format!("{f}.initial"))?;
                validate_positive(s.duration, &format!("{f}.duration"))?;
                validate_flow(&s.flow, &format!("{f}.flow"))?;
                if let Some(d) = s.drift_tolerance {
                    validate_positive(d, &format!("{f}.drift_tolerance"))?;
                }
                Ok(())
            }
            Experiment::CompareHydrogen(s) => {
                s.hydrogen
                    .validate()
                    .map_err(|e| EqError::config(format!("{f}.hydrogen"), e.to_string()))?;
                s.initial.validate(&format!("{f}.initial"))?;
                if !(s.initial.q > 0.0) {
                    return Err(EqError::config(
                        format!("{f}.initial.q"),
                        "must be positive",
                    ));
                }
                validate_positive(s.classical_horizon, &format!("{f}.classical_horizon"))?;
                validate_positive(s.horizon_factor, &format!("{f}.horizon_factor"))?;
                validate_flow(&s.flow, &format!("{f}.flow"))?;
                validate_positive(s.tolerance, &format!("{f}.tolerance"))
            }
            Experiment::TransformCheck(s) => {
                s.model.validate(&format!("{f}.model"))?;
                if let TransformKind::Scaling { lambda } = s.transform {
                    validate_positive(lambda, &format!("{f}.transform.lambda"))?;
                }
                s.initial.validate(&format!("{f}.initial"))?;
                validate_positive(s.duration, &format!("{f}.duration"))?;
                validate_flow(&s.flow, &format!("{f}.flow"))?;
                if s.flow.output_interval.is_none() {
                    return Err(EqError::config(
                        format!("{f}.flow.output_interval"),
                        "transform checks compare charts on a uniform time grid; set an output interval",
                    ));
                }
                validate_positive(s.tolerance, &format!("{f}.tolerance"))
            }
            Experiment::LimitStudy(s) => {
                if s.polynomials.is_empty() {
                    return Err(EqError::config(
                        format!("{f}.polynomials"),
                        "no polynomials given",
                    ));
                }
                for (i, p) in s.polynomials.iter().enumerate() {
                    validate_polynomial(p, &format!("{f}.polynomials[{i}]"))?;
                }
                if s.labels.is_empty() {
                    return Err(EqError::config(format!("{f}.labels"), "no labels given"));
                }
                for (i, l) in s.labels.iter().enumerate() {
                    l.validate(&format!("{f}.labels[{i}]"))?;
                }
                if s.hbars.len() < 3
                    || s.hbars.windows(2).any(|w| !(w[1] < w[0]))
                    || s.hbars.iter().any(|h| !(*h > 0.0))
                {
                    return Err(EqError::config(
                        format!("{f}.hbars"),
                        "need at least three positive, strictly decreasing values",
                    ));
                }
                validate_line_dim(s.line_dim, &format!("{f}.line_dim"))?;
                validate_positive(s.tolerance, &format!("{f}.tolerance"))
            }
        }
    }
}

/// Invariant suites for `eq verify`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    pub suites: Vec<Suite>,
}

fn two() -> f64 {
    2.0
}

fn fid_tol() -> f64 {
    1e-6
}

fn c2_tol() -> f64 {
    1e-5
}

fn means_dim() -> usize {
    300
}

fn means_samples() -> usize {
    50
}

fn three() -> f64 {
    3.0
}

fn means_tol() -> f64 {
    1e-8
}

fn drift_tol() -> f64 {
    1e-8
}

fn two_pi() -> f64 {
    2.0 * std::f64::consts::PI
}

fn flat_grid() -> LabelGrid {
    LabelGrid {
        p: Range {
            min: -2.0,
            max: 2.0,
            n: 5,
        },
        q: Range {
            min: -2.0,
            max: 2.0,
            n: 5,
        },
    }
}

fn default_polynomials() -> Vec<String> {
    [
        "0.5*P^2 + 0.5*Q^2",
        "Q^4",
        "P*Q*P",
        "D^2",
        "Q^2*P^2 + P^2*Q^2",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect()
}

fn default_limit_labels() -> Vec<Label> {
    vec![Label { p: 0.5, q: -1.0 }, Label { p: 1.2, q: 0.7 }]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "suite", rename_all = "snake_case", deny_unknown_fields)]
pub enum Suite {
    FiducialMoments {
        #[serde(default = "two")]
        beta: f64,
        #[serde(default = "one")]
        hbar: f64,
        #[serde(default = "fid_tol")]
        tolerance: f64,
        #[serde(default = "c2_tol")]
        c2_tolerance: f64,
    },
    LabelMeans {
        #[serde(default = "one")]
        hbar: f64,
        #[serde(default = "means_dim")]
        dim: usize,
        #[serde(default = "means_samples")]
        samples: usize,
        #[serde(default = "three")]
        radius: f64,
        #[serde(default)]
        seed: u64,
        #[serde(default = "means_tol")]
        tolerance: f64,
    },
    FlatMetric {
        #[serde(default = "one")]
        hbar: f64,
        #[serde(default = "default_line_dim")]
        line_dim: usize,
        #[serde(default = "flat_grid")]
        labels: LabelGrid,
        #[serde(default = "default_metric_tol")]
        tolerance: f64,
    },
    Curvature {
        family: FamilyParams,
        #[serde(default = "default_initial")]
        label: Label,
        #[serde(default = "fid_tol")]
        tolerance: f64,
    },
    EnergyDrift {
        #[serde(default)]
        model: ModelSpec,
        #[serde(default = "default_initial")]
        initial: Label,
        #[serde(default = "two_pi")]
        duration: f64,
        #[serde(default)]
        flow: FlowOptions,
        #[serde(default = "drift_tol")]
        max_drift: f64,
    },
    HydrogenContrast {
        #[serde(default)]
        spec: CompareHydrogenSpec,
    },
    WeakCorrespondence {
        #[serde(default = "default_polynomials")]
        polynomials: Vec<String>,
        #[serde(default = "default_limit_labels")]
        labels: Vec<Label>,
        #[serde(default = "default_hbars")]
        hbars: Vec<f64>,
        #[serde(default = "default_fit_tol")]
        tolerance: f64,
    },
}

impl Suite {
    pub fn name(&self) -> &'static str {
        match self {
            Suite::FiducialMoments { .. } => "fiducial_moments",
            Suite::LabelMeans { .. } => "label_means",
            Suite::FlatMetric { .. } => "flat_metric",
            Suite::Curvature { .. } => "curvature",
            Suite::EnergyDrift { .. } => "energy_drift",
            Suite::HydrogenContrast { .. } => "hydrogen_contrast",
            Suite::WeakCorrespondence { .. } => "weak_correspondence",
        }
    }
}

impl VerifyConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| {
            EqError::config(
                format!("line {}, column {}", e.line(), e.column()),
                e.to_string(),
            )
        })?;
        if cfg.suites.is_empty() {
            return Err(EqError::config("suites", "no suites selected"));
        }
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_a_metric_config() {
        let text = r#"{
            "experiment": {
                "kind": "metric",
                "family": {"kind": "canonical", "hbar": 1.0},
                "labels": {"p": {"min": -1, "max": 1, "n": 5}, "q": {"min": -1, "max": 1, "n": 5}}
            }
        }"#;
        let cfg = ExperimentConfig::from_json(text).unwrap();
        let Experiment::Metric(m) = &cfg.experiment else {
            panic!()
        };
        assert_eq!(m.labels.points().len(), 25);
        assert_eq!(m.line_dim, 200);
        assert_eq!(cfg.output.format, Format::Csv);
    }

    #[test]
    fn unknown_fields_are_rejected_with_position() {
        let text = "{\n  \"experiment\": {\"kind\": \"metric\", \"famly\": 1}\n}";
        match ExperimentConfig::from_json(text) {
            Err(EqError::Config { field, message }) => {
                assert!(field.starts_with("line "), "{field}");
                assert!(message.contains("famly"), "{message}");
            }
            other => panic!("{other:?}"),
        }
        let text = r#"{"experiment": {"kind": "evolve", "duration": 1.0, "flow": {"tol": 1e-8, "bogus": 1}}}"#;
        assert!(ExperimentConfig::from_json(text).is_err());
    }

    #[test]
    fn empty_range_is_a_field_error() {
        let text = r#"{"experiment": {"kind": "metric", "family": {"kind": "canonical", "hbar": 1.0},
            "labels": {"p": {"min": 1, "max": 0, "n": 3}, "q": {"min": 0, "max": 1, "n": 2}}}}"#;
        match ExperimentConfig::from_json(text) {
            Err(EqError::Config { field, .. }) => assert_eq!(field, "experiment.labels.p"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn round_trips_through_json() {
        let cfg = ExperimentConfig {
            experiment: Experiment::CompareHydrogen(CompareHydrogenSpec::default()),
            output: OutputSpec::default(),
        };
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(ExperimentConfig::from_json(&text).unwrap(), cfg);
    }

    #[test]
    fn verify_suites_parse_with_defaults() {
        let text = r#"{"suites": [{"suite": "fiducial_moments"}, {"suite": "curvature", "family": {"kind": "affine", "beta": 1.0, "hbar": 1.0}}]}"#;
        let cfg = VerifyConfig::from_json(text).unwrap();
        assert_eq!(cfg.suites.len(), 2);
        assert!(VerifyConfig::from_json(r#"{"suites": []}"#).is_err());
    }
}
