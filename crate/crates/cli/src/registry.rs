//! Experiments behind one trait, looked up by name at runtime.

use std::time::Instant;

use crate::config::ExperimentConfig;
use crate::error::{ConfigError, Result};
use crate::experiments;
use crate::output::Artifacts;

pub trait Experiment: Send + Sync {
    fn name(&self) -> &'static str;
    fn about(&self) -> &'static str;
    /// Experiment-specific checks on top of the shared ones.
    fn validate(&self, config: &ExperimentConfig) -> Vec<ConfigError>;
    fn run(&self, ctx: &mut RunContext) -> Result<Artifacts>;
}

/// Per-run state handed to an experiment.
#[derive(Debug)]
pub struct RunContext {
    pub config: ExperimentConfig,
    timings: Vec<(String, f64)>,
}

impl RunContext {
    pub fn new(config: ExperimentConfig) -> Self {
        RunContext {
            config,
            timings: Vec::new(),
        }
    }

    /// Runs `f` and records its wall time under `stage`.
    pub fn stage<T>(&mut self, stage: &str, f: impl FnOnce(&ExperimentConfig) -> T) -> T {
        let start = Instant::now();
        let out = f(&self.config);
        self.timings
            .push((stage.to_string(), start.elapsed().as_secs_f64()));
        out
    }

    pub fn timings(&self) -> &[(String, f64)] {
        &self.timings
    }
}

#[derive(Default)]
pub struct Registry {
    entries: Vec<Box<dyn Experiment>>,
}

impl Registry {
    pub fn empty() -> Self {
        Registry::default()
    }

    pub fn builtin() -> Self {
        let mut r = Registry::empty();
        r.register(Box::new(experiments::Gen));
        r.register(Box::new(experiments::Mark));
        r.register(Box::new(experiments::Cuts));
        r.register(Box::new(experiments::Theorem31));
        r.register(Box::new(experiments::Corollary32));
        r.register(Box::new(experiments::Rayleigh));
        r.register(Box::new(experiments::ZMoments));
        r.register(Box::new(experiments::Calibrate));
        r
    }

    /// Adds an experiment, replacing any registered under the same name.
    pub fn register(&mut self, e: Box<dyn Experiment>) {
        match self.entries.iter_mut().find(|x| x.name() == e.name()) {
            Some(slot) => *slot = e,
            None => self.entries.push(e),
        }
    }

    pub fn get(&self, name: &str) -> Option<&dyn Experiment> {
        self.entries
            .iter()
            .find(|e| e.name() == name)
            .map(|e| e.as_ref())
    }

    pub fn iter(&self) -> impl Iterator<Item = &dyn Experiment> {
        self.entries.iter().map(|e| e.as_ref())
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.iter().map(|e| e.name()).collect()
    }
}
