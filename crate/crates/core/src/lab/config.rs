use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    Lsd,
    Moments,
    SecondEigSweep,
    SubgraphProb,
    CapMixing,
    Decomp,
    Oracle,
    Sample,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Lsd => "lsd",
            Experiment::Moments => "moments",
            Experiment::SecondEigSweep => "second_eig_sweep",
            Experiment::SubgraphProb => "subgraph_prob",
            Experiment::CapMixing => "cap_mixing",
            Experiment::Decomp => "decomp",
            Experiment::Oracle => "oracle",
            Experiment::Sample => "sample",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Generator {
    Geometric,
    ErdosRenyi,
}

/// Pass/fail thresholds applied by the runners.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Thresholds {
    /// Largest accepted KS distance to the semicircle.
    pub ks_max: f64,
    /// Relative tolerance on single-sample dense moments.
    pub moment_rel_tol: f64,
    /// Width, in standard errors, of Monte Carlo comparisons.
    pub z: f64,
    /// Accepted range of `lambda(A) / sqrt(np)` in sweeps.
    pub lambda_ratio: [f64; 2],
    /// Accepted range of the log-log slope in sweeps.
    pub slope: [f64; 2],
}

impl Default for Thresholds {
    fn default() -> Self {
        Self { ks_max: 0.05, moment_rel_tol: 0.10, z: 3.0, lambda_ratio: [1.5, 4.0], slope: [0.4, 0.6] }
    }
}

/// One experiment, as read from a JSON document. Fields not given in the
/// document take the preset of the experiment (see [`ExperimentConfig::preset`]).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub generator: Generator,
    pub n: usize,
    pub d: Option<usize>,
    pub p: Option<f64>,
    /// Expected degree; sets `p = alpha / n` and selects the sparse regime.
    pub alpha: Option<f64>,
    /// Graphs per run, or Monte Carlo draws for the sampling experiments.
    pub trials: u64,
    pub k_max: u32,
    /// Walk length (oracle) or number of cap-walk steps (cap mixing).
    pub k: usize,
    pub seed: u64,
    pub output_dir: Option<PathBuf>,
    pub bins: usize,
    pub range: [f64; 2],
    pub sweep_n: Vec<usize>,
    pub sweep_d: Vec<usize>,
    /// Sweep rule `d = round(d_factor * n * p)` when `sweep_d` is empty.
    pub d_factor: f64,
    /// Cycle and path length for subgraph probabilities.
    pub ell: usize,
    /// Inner product of the pinned path endpoints.
    pub pinned_inner: f64,
    pub tv_bins: usize,
    pub graph_file: Option<PathBuf>,
    pub walks: Vec<Vec<usize>>,
    /// Constant in the walk-graph contribution bound.
    pub c_const: f64,
    /// Calibration tolerance on `p`.
    pub tol: f64,
    pub thresholds: Thresholds,
}

/// Largest matrix the dense eigensolver is asked to handle.
pub const MAX_DENSE_N: usize = 6000;

fn check_dense_size(n: usize) -> Result<()> {
    if !(2..=MAX_DENSE_N).contains(&n) {
        return Err(invalid(format!("spectral runs need 2 <= n <= {MAX_DENSE_N}, got {n}")));
    }
    Ok(())
}

impl ExperimentConfig {
    /// Defaults for each experiment, sized like the reference runs.
    pub fn preset(experiment: Experiment) -> Self {
        let base = Self {
            experiment,
            generator: Generator::Geometric,
            n: 1000,
            d: Some(100),
            p: Some(0.05),
            alpha: None,
            trials: 1,
            k_max: 6,
            k: 4,
            seed: 0,
            output_dir: None,
            bins: crate::spectral::DEFAULT_BINS,
            range: [crate::spectral::DEFAULT_RANGE.0, crate::spectral::DEFAULT_RANGE.1],
            sweep_n: Vec::new(),
            sweep_d: Vec::new(),
            d_factor: 2.0,
            ell: 3,
            pinned_inner: 0.0,
            tv_bins: 20,
            graph_file: None,
            walks: Vec::new(),
            c_const: 1.0,
            tol: 1e-12,
            thresholds: Thresholds::default(),
        };
        match experiment {
            Experiment::Lsd => Self { n: 2500, d: Some(300), p: Some(0.01), ..base },
            Experiment::Moments => Self { n: 2500, d: Some(100), p: None, alpha: Some(2.23), trials: 20, ..base },
            Experiment::SecondEigSweep => {
                Self { p: Some(0.02), d: None, sweep_n: vec![500, 1000, 2000, 4000], ..base }
            }
            Experiment::SubgraphProb => {
                Self { d: Some(200), p: Some(0.05), trials: 10_000_000, sweep_d: vec![200, 800], ..base }
            }
            Experiment::CapMixing => Self { d: Some(100), p: Some(0.1), trials: 100_000, k: 6, ..base },
            Experiment::Decomp => Self { n: 30, d: Some(10), p: Some(0.2), ..base },
            Experiment::Oracle => Self { n: 8, d: Some(500), p: Some(0.2), trials: 10_000, ..base },
            Experiment::Sample => base,
        }
    }

    /// Preset for `experiment`, overridden field by field by `overrides`
    /// (a JSON object; its `experiment` field, if any, is ignored).
    pub fn from_overrides(experiment: Experiment, overrides: Option<Value>) -> Result<Self> {
        let mut merged = serde_json::to_value(Self::preset(experiment))?;
        if let Some(over) = overrides {
            let Value::Object(fields) = over else {
                return Err(invalid("config must be a JSON object"));
            };
            let target = merged.as_object_mut().expect("config serializes to an object");
            for (key, value) in fields {
                if key == "experiment" {
                    continue;
                }
                if key == "thresholds" {
                    if let (Some(Value::Object(t)), Value::Object(v)) = (target.get_mut("thresholds"), &value) {
                        t.extend(v.clone());
                        continue;
                    }
                }
                // alpha and p are alternatives: setting one clears the other
                if key == "alpha" && !value.is_null() {
                    target.insert("p".into(), Value::Null);
                }
                if key == "p" && !value.is_null() {
                    target.insert("alpha".into(), Value::Null);
                }
                target.insert(key, value);
            }
        }
        let cfg: Self = serde_json::from_value(merged)?;
        Ok(cfg)
    }

    pub fn from_json(experiment: Experiment, text: &str) -> Result<Self> {
        Self::from_overrides(experiment, Some(serde_json::from_str(text)?))
    }

    /// Edge probability after resolving `alpha`.
    pub fn resolved_p(&self) -> Result<f64> {
        let p = match (self.p, self.alpha) {
            (Some(_), Some(_)) => return Err(invalid("give either p or alpha, not both")),
            (Some(p), None) => p,
            (None, Some(alpha)) => {
                if !(alpha > 0.0) {
                    return Err(invalid(format!("alpha must be positive, got {alpha}")));
                }
                alpha / self.n as f64
            }
            (None, None) => return Err(invalid("one of p or alpha is required")),
        };
        if !(p > 0.0 && p < 1.0) {
            return Err(invalid(format!("p must lie in (0, 1) after resolution, got {p}")));
        }
        Ok(p)
    }

    pub fn is_sparse(&self) -> bool {
        self.alpha.is_some()
    }

    pub fn dimension(&self) -> Result<usize> {
        match self.d {
            Some(d) if d >= 2 => Ok(d),
            Some(d) => Err(invalid(format!("d must be >= 2, got {d}"))),
            None => Err(invalid("dimension d is required")),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(invalid("trials must be >= 1"));
        }
        if !(self.range[0] < self.range[1]) || self.bins == 0 {
            return Err(invalid("histogram needs bins >= 1 and range lo < hi"));
        }
        match self.experiment {
            Experiment::Lsd | Experiment::Moments => {
                check_dense_size(self.n)?;
                if self.k_max > 12 {
                    return Err(invalid(format!("k_max must be <= 12, got {}", self.k_max)));
                }
                self.resolved_p()?;
                if self.generator == Generator::Geometric {
                    self.dimension()?;
                }
            }
            Experiment::SecondEigSweep => {
                if self.sweep_n.is_empty() {
                    return Err(invalid("sweep_n must not be empty"));
                }
                if !self.sweep_d.is_empty() && self.sweep_d.len() != self.sweep_n.len() {
                    return Err(invalid("sweep_d must match sweep_n in length"));
                }
                self.sweep_n.iter().try_for_each(|&n| check_dense_size(n))?;
                self.resolved_p()?;
            }
            Experiment::SubgraphProb => {
                if !(3..=5).contains(&self.ell) {
                    return Err(invalid(format!("ell must be 3, 4 or 5, got {}", self.ell)));
                }
                if !(-1.0..=1.0).contains(&self.pinned_inner) {
                    return Err(invalid("pinned_inner must lie in [-1, 1]"));
                }
                self.resolved_p()?;
                self.dimension()?;
            }
            Experiment::CapMixing => {
                if !(1..=6).contains(&self.k) {
                    return Err(invalid(format!("cap walk length must be in 1..=6, got {}", self.k)));
                }
                if self.tv_bins < 2 {
                    return Err(invalid("tv_bins must be >= 2"));
                }
                self.resolved_p()?;
                self.dimension()?;
            }
            Experiment::Oracle => {
                if self.n > 8 || self.k > 8 {
                    return Err(invalid(format!("oracle needs n <= 8 and k <= 8, got n={}, k={}", self.n, self.k)));
                }
                self.resolved_p()?;
                self.dimension()?;
            }
            Experiment::Decomp | Experiment::Sample => {
                if self.graph_file.is_none() {
                    self.resolved_p()?;
                    if self.generator == Generator::Geometric {
                        self.dimension()?;
                    }
                }
            }
        }
        Ok(())
    }
}
