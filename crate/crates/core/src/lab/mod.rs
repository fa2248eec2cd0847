//! Experiment orchestration: configs, runners, reports and their on-disk layout.

pub mod config;
pub mod report;
pub mod runners;
pub mod subgraph;

pub use config::{Experiment, ExperimentConfig, Generator, Thresholds};
pub use report::{run_id, Aggregate, Comparison, RunOutput, RunReport};
pub use runners::{decompose_components, run, run_lsd, run_moments, run_second_eig, sample_graph, SampledGraph};
