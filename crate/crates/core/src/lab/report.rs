use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use super::config::{Experiment, ExperimentConfig};
use crate::error::Result;
use crate::rng::{Estimate, PRNG_ALGORITHM};

pub const SCHEMA_VERSION: u32 = 1;

/// A reported quantity: either exact, or a mean with its standard error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub name: String,
    pub value: f64,
    pub se: Option<f64>,
    pub exact: bool,
}

impl Aggregate {
    pub fn exact(name: impl Into<String>, value: f64) -> Self {
        Self { name: name.into(), value, se: None, exact: true }
    }

    pub fn estimate(name: impl Into<String>, est: &Estimate) -> Self {
        Self { name: name.into(), value: est.mean, se: Some(est.se), exact: false }
    }
}

/// An observed value checked against an accepted interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub name: String,
    pub observed: f64,
    pub reference: Option<f64>,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub pass: bool,
}

impl Comparison {
    pub fn interval(name: impl Into<String>, observed: f64, reference: Option<f64>, lower: Option<f64>, upper: Option<f64>) -> Self {
        let pass = observed.is_finite()
            && lower.is_none_or(|lo| observed >= lo)
            && upper.is_none_or(|hi| observed <= hi);
        Self { name: name.into(), observed, reference, lower, upper, pass }
    }

    pub fn within_se(name: impl Into<String>, est: &Estimate, reference: f64, z: f64) -> Self {
        let half = z * est.se;
        Self::interval(name, est.mean, Some(reference), Some(reference - half), Some(reference + half))
    }

    pub fn within_rel(name: impl Into<String>, observed: f64, reference: f64, rel: f64) -> Self {
        let half = rel * reference.abs();
        Self::interval(name, observed, Some(reference), Some(reference - half), Some(reference + half))
    }

    pub fn at_most(name: impl Into<String>, observed: f64, bound: f64) -> Self {
        Self::interval(name, observed, None, None, Some(bound))
    }

    pub fn at_least(name: impl Into<String>, observed: f64, bound: f64) -> Self {
        Self::interval(name, observed, None, Some(bound), None)
    }

    pub fn flag(name: impl Into<String>, ok: bool) -> Self {
        let observed = if ok { 1.0 } else { 0.0 };
        Self::interval(name, observed, Some(1.0), Some(1.0), None)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedInfo {
    pub algorithm: String,
    pub seed: u64,
    /// Derived seed of each trial or sweep point.
    pub derived: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub run_id: String,
    pub experiment: Experiment,
    pub config: ExperimentConfig,
    pub prng: SeedInfo,
    pub wall_clock_seconds: f64,
    pub per_trial: Vec<Value>,
    pub aggregates: Vec<Aggregate>,
    pub comparisons: Vec<Comparison>,
    pub passed: bool,
    pub warnings: Vec<String>,
    pub artifacts: Vec<String>,
    /// Experiment-specific payload.
    pub details: Value,
}

impl RunReport {
    pub fn new(config: &ExperimentConfig) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            run_id: run_id(config),
            experiment: config.experiment,
            config: config.clone(),
            prng: SeedInfo { algorithm: PRNG_ALGORITHM.into(), seed: config.seed, derived: Vec::new() },
            wall_clock_seconds: 0.0,
            per_trial: Vec::new(),
            aggregates: Vec::new(),
            comparisons: Vec::new(),
            passed: true,
            warnings: Vec::new(),
            artifacts: Vec::new(),
            details: Value::Null,
        }
    }

    pub fn compare(&mut self, c: Comparison) {
        self.passed &= c.pass;
        self.comparisons.push(c);
    }

    pub fn comparison(&self, name: &str) -> Option<&Comparison> {
        self.comparisons.iter().find(|c| c.name == name)
    }

    pub fn aggregate(&self, name: &str) -> Option<&Aggregate> {
        self.aggregates.iter().find(|a| a.name == name)
    }
}

/// First 16 hex digits of SHA-256 over the canonical JSON of the config
/// (which includes the seed), with the output directory left out.
pub fn run_id(config: &ExperimentConfig) -> String {
    let mut c = config.clone();
    c.output_dir = None;
    let bytes = serde_json::to_vec(&c).expect("config serializes");
    let digest = Sha256::digest(&bytes);
    digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

/// A report plus the plot-ready files that go next to it.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub report: RunReport,
    pub artifacts: Vec<(String, String)>,
}

impl RunOutput {
    pub fn new(report: RunReport) -> Self {
        Self { report, artifacts: Vec::new() }
    }

    pub fn attach(&mut self, name: &str, contents: String) {
        self.report.artifacts.push(name.to_string());
        self.artifacts.push((name.to_string(), contents));
    }

    /// Writes `base/{run_id}/report.json` and the artifacts; returns the run directory.
    pub fn persist(&self, base: &Path) -> Result<PathBuf> {
        let dir = base.join(&self.report.run_id);
        fs::create_dir_all(&dir)?;
        for (name, contents) in &self.artifacts {
            fs::write(dir.join(name), contents)?;
        }
        let json = serde_json::to_string_pretty(&self.report)?;
        fs::write(dir.join("report.json"), json + "\n")?;
        Ok(dir)
    }
}
