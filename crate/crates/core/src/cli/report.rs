//! Checks, output headers and file assembly.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::dynamics::Trajectory;
use crate::error::Result;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub tolerance: f64,
    pub passed: bool,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub detail: String,
}

impl Check {
    /// Passes when `measured ≤ tolerance`.
    pub fn at_most(name: impl Into<String>, measured: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            measured,
            tolerance,
            passed: measured <= tolerance,
            detail: String::new(),
        }
    }

    /// Passes when `measured ≥ tolerance`.
    pub fn at_least(name: impl Into<String>, measured: f64, bound: f64) -> Self {
        Self {
            name: name.into(),
            measured,
            tolerance: bound,
            passed: measured >= bound,
            detail: String::new(),
        }
    }

    pub fn flag(name: impl Into<String>, ok: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            measured: if ok { 1.0 } else { 0.0 },
            tolerance: 1.0,
            passed: ok,
            detail: detail.into(),
        }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = detail.into();
        self
    }

    pub fn line(&self) -> String {
        let mut s = format!(
            "{} {}: measured {:e}, tolerance {:e}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.measured,
            self.tolerance
        );
        if !self.detail.is_empty() {
            let _ = write!(s, " ({})", self.detail);
        }
        s
    }
}

/// Provenance block written at the top of every output file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Header {
    pub tool: String,
    pub version: String,
    pub experiment: String,
    pub config_sha256: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stamp: Option<u64>,
}

impl Header {
    pub fn new(experiment: &str, canonical_config: &str, stamp: Option<u64>) -> Self {
        Self {
            tool: "eq".into(),
            version: VERSION.into(),
            experiment: experiment.into(),
            config_sha256: hex::encode(Sha256::digest(canonical_config.as_bytes())),
            stamp,
        }
    }

    fn csv_lines(&self) -> String {
        let mut s = format!(
            "# {} {}\n# experiment {}\n# config_sha256 {}\n",
            self.tool, self.version, self.experiment, self.config_sha256
        );
        if let Some(t) = self.stamp {
            let _ = writeln!(s, "# stamp {t}");
        }
        s
    }
}

/// An output file body; the header is attached when written.
#[derive(Debug, Clone)]
pub enum Body {
    Csv(String),
    Json(Value),
}

#[derive(Debug, Clone)]
pub struct OutputFile {
    pub name: String,
    pub body: Body,
}

impl OutputFile {
    pub fn csv(name: impl Into<String>, body: String) -> Self {
        Self {
            name: name.into(),
            body: Body::Csv(body),
        }
    }

    pub fn json(name: impl Into<String>, body: Value) -> Self {
        Self {
            name: name.into(),
            body: Body::Json(body),
        }
    }

    pub fn trajectory(stem: &str, tr: &Trajectory, format: super::config::Format) -> Result<Self> {
        Ok(match format {
            super::config::Format::Csv => Self::csv(format!("{stem}.csv"), tr.to_csv()),
            super::config::Format::Json => {
                Self::json(format!("{stem}.json"), serde_json::to_value(tr)?)
            }
        })
    }

    pub fn render(&self, header: &Header) -> Result<String> {
        Ok(match &self.body {
            Body::Csv(b) => format!("{}{b}", header.csv_lines()),
            Body::Json(v) => {
                let doc = json!({ "header": header, "data": v });
                let mut s = serde_json::to_string_pretty(&doc)?;
                s.push('\n');
                s
            }
        })
    }
}

/// Files and checks produced by one run.
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub files: Vec<OutputFile>,
    pub checks: Vec<Check>,
    pub summary: serde_json::Map<String, Value>,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn note(&mut self, key: &str, value: impl Serialize) -> Result<()> {
        self.summary
            .insert(key.to_string(), serde_json::to_value(value)?);
        Ok(())
    }

    /// Writes every file plus `summary.json` into `dir`.
    pub fn write(&self, dir: &Path, header: &Header) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        let mut summary = self.summary.clone();
        summary.insert("checks".into(), serde_json::to_value(&self.checks)?);
        summary.insert("passed".into(), Value::Bool(self.passed()));
        let files = self
            .files
            .iter()
            .cloned()
            .chain(std::iter::once(OutputFile::json(
                "summary.json",
                Value::Object(summary),
            )));
        for f in files {
            let path = dir.join(&f.name);
            std::fs::write(&path, f.render(header)?)?;
            written.push(path);
        }
        Ok(written)
    }
}

/// Strips `#` header lines, leaving the CSV body.
pub fn csv_body(text: &str) -> String {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .fold(String::new(), |mut acc, l| {
            acc.push_str(l);
            acc.push('\n');
            acc
        })
}
