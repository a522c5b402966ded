//! Config-driven experiments, CSV tables and run manifests.
//!
//! Exit codes: 0 success, 2 configuration or parameter error, 3 solver
//! non-convergence (artifacts written so far and the manifest are kept),
//! 4 invariant failure.

mod config;
mod experiments;
mod output;
mod verify;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

pub use config::{Checks, ExternalSpec, Family, Method, Physical, RunConfig, Solver, Sweep, TorusSection};
pub use output::{read_csv_columns, sha256_hex, ArtifactWriter, Cell, FileEntry};
pub use verify::verify_artifacts;

use crate::error::{Error, Result};

pub const MANIFEST: &str = "manifest.json";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Subcommand {
    FreeVacuum,
    Torus,
    Bdf,
    Kato,
    Renorm,
    OracleCheck,
    Verify,
}

impl Subcommand {
    pub fn name(self) -> &'static str {
        match self {
            Self::FreeVacuum => "free-vacuum",
            Self::Torus => "torus",
            Self::Bdf => "bdf",
            Self::Kato => "kato",
            Self::Renorm => "renorm",
            Self::OracleCheck => "oracle-check",
            Self::Verify => "verify",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    ConfigError,
    NonConvergence,
    InvariantFailure,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Self::Ok => 0,
            Self::ConfigError => 2,
            Self::NonConvergence => 3,
            Self::InvariantFailure => 4,
        }
    }

    /// Exit status implied by an error escaping an experiment.
    pub fn of_error(e: &Error) -> Self {
        match e {
            Error::Config(_)
            | Error::Parameter(_)
            | Error::Domain(_)
            | Error::Io { .. }
            | Error::LatticeTooLarge { .. } => Self::ConfigError,
            Error::NonConvergence { .. }
            | Error::StepSize(_)
            | Error::NearZeroEigenvalue { .. }
            | Error::DegenerateSymbol { .. }
            | Error::Uniqueness { .. } => Self::NonConvergence,
            Error::Constraint { .. } => Self::InvariantFailure,
        }
    }
}

/// Summary of one solver run inside an experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub name: String,
    pub converged: bool,
    pub iterations: usize,
    pub residual: f64,
    pub scalars: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

/// `value` compared against `limit`; `skipped` checks never affect the exit status.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    pub value: f64,
    pub limit: f64,
    pub passed: bool,
    pub skipped: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub subcommand: Subcommand,
    pub experiment: String,
    pub seed: u64,
    pub config: RunConfig,
    pub started_unix: u64,
    pub finished_unix: u64,
    pub status: Status,
    pub exit_code: i32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub experiments: Vec<ExperimentSummary>,
    pub checks: Vec<CheckRecord>,
    pub files: Vec<FileEntry>,
}

impl RunManifest {
    pub fn load(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST);
        let text = std::fs::read_to_string(&path).map_err(|source| output::io(&path, source))?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn scalar(&self, experiment: &str, key: &str) -> Option<f64> {
        self.experiments.iter().find(|e| e.name == experiment)?.scalars.get(key).copied()
    }
}

/// State shared by the experiments of one invocation.
#[derive(Debug)]
pub struct Run {
    pub cfg: RunConfig,
    pub tag: String,
    /// Directory that relative paths in the config refer to.
    pub base: PathBuf,
    pub writer: ArtifactWriter,
    pub experiments: Vec<ExperimentSummary>,
    pub checks: Vec<CheckRecord>,
}

impl Run {
    pub fn new(cfg: RunConfig, subcommand: Subcommand, base: &Path, out: &Path) -> Result<Self> {
        let tag = cfg.tag(subcommand.name());
        Ok(Self {
            cfg,
            tag,
            base: base.to_path_buf(),
            writer: ArtifactWriter::new(out)?,
            experiments: Vec::new(),
            checks: Vec::new(),
        })
    }

    /// Records `value ≤ limit`.
    pub fn check_le(&mut self, name: &str, value: f64, limit: f64) {
        self.check(name, value, limit, value <= limit);
    }

    pub fn check(&mut self, name: &str, value: f64, limit: f64, passed: bool) {
        let skipped = !self.cfg.checks.enabled || self.cfg.checks.skip.iter().any(|s| s == name);
        self.checks.push(CheckRecord { name: name.to_string(), value, limit, passed, skipped });
    }

    pub fn record(&mut self, name: &str, iterations: usize, residual: f64, scalars: &[(&str, f64)]) {
        self.experiments.push(ExperimentSummary {
            name: name.to_string(),
            converged: true,
            iterations,
            residual,
            scalars: scalars.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            message: None,
        });
    }

    pub fn csv_name(&self, suffix: &str) -> String {
        if suffix.is_empty() {
            format!("{}.csv", self.tag)
        } else {
            format!("{}_{suffix}.csv", self.tag)
        }
    }

    fn failed_checks(&self) -> Vec<&CheckRecord> {
        self.checks.iter().filter(|c| !c.passed && !c.skipped).collect()
    }
}

/// Output directory: `--out`, then `OUTPUT_DIR`, then `output.dir`, then `out/<tag>`.
pub fn resolve_output_dir(cli: Option<&Path>, env: Option<&str>, cfg: &RunConfig, subcommand: Subcommand) -> PathBuf {
    cli.map(Path::to_path_buf)
        .or_else(|| env.filter(|s| !s.is_empty()).map(PathBuf::from))
        .or_else(|| cfg.output.dir.clone())
        .unwrap_or_else(|| PathBuf::from("out").join(cfg.tag(subcommand.name())))
}

/// Outcome of [`execute`]: the manifest (when one was written) and the status.
#[derive(Debug)]
pub struct Outcome {
    pub status: Status,
    pub manifest: Option<RunManifest>,
    pub message: Option<String>,
}

/// Runs `subcommand` and writes `manifest.json` next to its tables.
///
/// `base` is the directory of the config file. Never panics on solver
/// failures; the status carries the exit code.
pub fn execute(cfg: RunConfig, subcommand: Subcommand, base: &Path, out: &Path) -> Outcome {
    if subcommand == Subcommand::Verify {
        return match verify_artifacts(out) {
            Ok(report) => Outcome {
                status: if report.passed() { Status::Ok } else { Status::InvariantFailure },
                manifest: None,
                message: Some(report.to_string()),
            },
            Err(e) => Outcome { status: Status::of_error(&e), manifest: None, message: Some(e.to_string()) },
        };
    }
    if let Err(e) = cfg.validate() {
        return Outcome { status: Status::ConfigError, manifest: None, message: Some(e.to_string()) };
    }
    let started = unix_now();
    let mut run = match Run::new(cfg, subcommand, base, out) {
        Ok(r) => r,
        Err(e) => return Outcome { status: Status::of_error(&e), manifest: None, message: Some(e.to_string()) },
    };
    let result = experiments::dispatch(&mut run, subcommand);
    let (status, error) = match &result {
        Err(e) => {
            run.experiments.push(ExperimentSummary {
                name: subcommand.name().to_string(),
                converged: false,
                iterations: match e {
                    Error::NonConvergence { iterations, .. } => *iterations,
                    _ => 0,
                },
                residual: match e {
                    Error::NonConvergence { residuals, .. } => residuals.last().copied().unwrap_or(f64::NAN),
                    _ => f64::NAN,
                },
                scalars: BTreeMap::new(),
                message: Some(e.to_string()),
            });
            (Status::of_error(e), Some(e.to_string()))
        }
        Ok(()) if !run.failed_checks().is_empty() => {
            let names: Vec<_> = run.failed_checks().iter().map(|c| c.name.clone()).collect();
            (Status::InvariantFailure, Some(format!("failed checks: {}", names.join(", "))))
        }
        Ok(()) => (Status::Ok, None),
    };
    let manifest = RunManifest {
        tool: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        subcommand,
        experiment: run.tag.clone(),
        seed: run.cfg.seed,
        config: run.cfg.clone(),
        started_unix: started,
        finished_unix: unix_now(),
        status,
        exit_code: status.exit_code(),
        error: error.clone(),
        experiments: run.experiments.clone(),
        checks: run.checks.clone(),
        files: run.writer.files().to_vec(),
    };
    let path = run.writer.dir().join(MANIFEST);
    let written = serde_json::to_string_pretty(&manifest)
        .map_err(|e| Error::Config(e.to_string()))
        .and_then(|text| std::fs::write(&path, text + "\n").map_err(|source| output::io(&path, source)));
    if let Err(e) = written {
        return Outcome { status: Status::ConfigError, manifest: Some(manifest), message: Some(e.to_string()) };
    }
    Outcome { status, manifest: Some(manifest), message: error }
}

fn unix_now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}
