//! Experiment runner for `levytree-core`: a TOML config selects one of the
//! registered experiments, which runs its replicas on a worker pool and
//! writes plot-ready CSV and JSON.

pub mod config;
pub mod error;
pub mod experiments;
pub mod output;
pub mod registry;
pub mod runner;

pub use config::ExperimentConfig;
pub use error::{CliError, ConfigError};
pub use registry::{Experiment, Registry, RunContext};
pub use runner::{emit_manifest, run_experiment, RunOutcome};
