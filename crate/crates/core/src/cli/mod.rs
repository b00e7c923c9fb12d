//! The `eq` command line: `eq run` and `eq verify`.

pub mod config;
pub mod experiments;
pub mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use crate::error::{EqError, Result};
pub use config::{ExperimentConfig, VerifyConfig};
pub use experiments::{build_model, run_experiment, run_suite};
pub use report::{csv_body, Check, Header, Outcome};

pub const OUT_DIR_ENV: &str = "EQ_OUT_DIR";

#[derive(Debug, Parser)]
#[command(
    name = "eq",
    version,
    about = "Coherent-state quantization experiments"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one experiment from a JSON config.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory; overrides the config and $EQ_OUT_DIR.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Integer written into output headers (e.g. a timestamp).
        #[arg(long)]
        stamp: Option<u64>,
        #[arg(long, short)]
        verbose: bool,
    },
    /// Run verification suites and print one line per check.
    Verify {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, short)]
        verbose: bool,
    },
}

/// Exit codes: 0 all checks pass, 1 a check failed, 2 bad config, 3 anything else.
pub fn exit_code(res: &Result<bool>) -> u8 {
    match res {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(EqError::Config { .. }) | Err(EqError::Json(_)) => 2,
        Err(_) => 3,
    }
}

pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let res = dispatch(&cli.command);
    if let Err(e) = &res {
        eprintln!("error: {e}");
    }
    ExitCode::from(exit_code(&res))
}

pub fn dispatch(cmd: &Command) -> Result<bool> {
    match cmd {
        Command::Run {
            config,
            out,
            stamp,
            verbose,
        } => run(config, out.as_deref(), *stamp, *verbose),
        Command::Verify {
            config,
            out,
            verbose,
        } => verify(config, out.as_deref(), *verbose),
    }
}

fn read_config(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| EqError::config("--config", format!("{}: {e}", path.display())))
}

pub fn resolve_out_dir(flag: Option<&Path>, from_config: Option<&Path>) -> PathBuf {
    flag.map(Path::to_path_buf)
        .or_else(|| from_config.map(Path::to_path_buf))
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("eq-out"))
}

pub fn run(path: &Path, out: Option<&Path>, stamp: Option<u64>, verbose: bool) -> Result<bool> {
    let cfg = ExperimentConfig::from_json(&read_config(path)?)?;
    cfg.validate()?;
    let canonical = serde_json::to_string(&cfg)?;
    let outcome = run_experiment(&cfg)?;
    let dir = resolve_out_dir(out, cfg.output.dir.as_deref());
    let header = Header::new(cfg.experiment.name(), &canonical, stamp);
    let written = outcome.write(&dir, &header)?;
    if verbose {
        for p in &written {
            eprintln!("wrote {}", p.display());
        }
    }
    for c in &outcome.checks {
        println!("{}", c.line());
    }
    Ok(outcome.passed())
}

pub fn verify(path: &Path, out: Option<&Path>, verbose: bool) -> Result<bool> {
    let cfg = VerifyConfig::from_json(&read_config(path)?)?;
    let canonical = serde_json::to_string(&cfg)?;
    let mut all = true;
    let mut report = Vec::new();
    for suite in &cfg.suites {
        let checks = run_suite(suite)?;
        for c in &checks {
            println!(
                "{} [{}] {}",
                if c.passed { "PASS" } else { "FAIL" },
                suite.name(),
                &c.line()[5..]
            );
            all &= c.passed;
        }
        if verbose {
            eprintln!("suite {} done", suite.name());
        }
        report.push(json!({ "suite": suite.name(), "checks": checks }));
    }
    if let Some(dir) = out {
        std::fs::create_dir_all(dir)?;
        let header = Header::new("verify", &canonical, None);
        let doc = json!({ "header": header, "suites": report, "passed": all });
        std::fs::write(
            dir.join("verify_report.json"),
            serde_json::to_string_pretty(&doc)? + "\n",
        )?;
    }
    Ok(all)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn out_dir_precedence() {
        let flag = Path::new("a");
        let cfg = Path::new("b");
        assert_eq!(resolve_out_dir(Some(flag), Some(cfg)), PathBuf::from("a"));
        assert_eq!(resolve_out_dir(None, Some(cfg)), PathBuf::from("b"));
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Ok(true)), 0);
        assert_eq!(exit_code(&Ok(false)), 1);
        assert_eq!(exit_code(&Err(EqError::config("x", "bad"))), 2);
        assert_eq!(exit_code(&Err(EqError::invalid("bad"))), 3);
    }

    #[test]
    fn invalid_config_writes_nothing() {
        let tmp = tempfile::tempdir().unwrap();
        let cfg = tmp.path().join("c.json");
        std::fs::write(
            &cfg,
            r#"{"experiment":{"kind":"curvature","family":{"kind":"canonical","hbar":1},
                "labels":{"p":{"min":0,"max":1,"n":0},"q":{"min":0,"max":1,"n":2}}}}"#,
        )
        .unwrap();
        let out = tmp.path().join("out");
        let res = run(&cfg, Some(&out), None, false);
        assert_eq!(exit_code(&res), 2);
        assert!(!out.exists());
    }

    #[test]
    fn metric_run_writes_header_and_rows() {
        let tmp = tempfile::tempdir().unwrap();
        let cfg = tmp.path().join("c.json");
        std::fs::write(
            &cfg,
            r#"{"experiment":{"kind":"metric","family":{"kind":"canonical","hbar":1},"line_dim":120,
                "labels":{"p":{"min":-1,"max":1,"n":2},"q":{"min":0,"max":1,"n":2}}}}"#,
        )
        .unwrap();
        let out = tmp.path().join("out");
        assert!(run(&cfg, Some(&out), Some(42), false).unwrap());
        let text = std::fs::read_to_string(out.join("metric.csv")).unwrap();
        assert!(text.contains("# experiment metric\n"));
        assert!(text.contains("# stamp 42\n"));
        let body = csv_body(&text);
        let mut lines = body.lines();
        assert_eq!(lines.next(), Some("p,q,g_pp,g_pq,g_qq"));
        assert_eq!(lines.count(), 4);
        assert!(out.join("summary.json").exists());
    }

    #[test]
    fn verify_reports_failures() {
        let tmp = tempfile::tempdir().unwrap();
        let cfg = tmp.path().join("v.json");
        std::fs::write(
            &cfg,
            r#"{"suites":[{"suite":"energy_drift","max_drift":0.0}]}"#,
        )
        .unwrap();
        let res = verify(&cfg, Some(tmp.path()), false);
        assert_eq!(exit_code(&res), 1);
        let report = std::fs::read_to_string(tmp.path().join("verify_report.json")).unwrap();
        assert!(report.contains("\"passed\": false"));
    }
}
