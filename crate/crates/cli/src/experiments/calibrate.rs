//! Pilot calibration of the Brownian edge scale.

use levytree_core::gwgen::calibration_from_unit_heights;

use super::pilot_heights;
use crate::config::ExperimentConfig;
use crate::error::{ConfigError, Result};
use crate::output::{fmt_f64, Artifacts, Table};
use crate::registry::{Experiment, RunContext};

pub struct Calibrate;

impl Experiment for Calibrate {
    fn name(&self) -> &'static str {
        "calibrate"
    }

    fn about(&self) -> &'static str {
        "estimate c in edge_scale = c / sqrt(n) from pilot trees"
    }

    fn validate(&self, config: &ExperimentConfig) -> Vec<ConfigError> {
        let mut errs = Vec::new();
        config.require_tree_size(&mut errs);
        if !config.offspring.is_finite_variance() {
            errs.push(ConfigError::new(
                "offspring",
                "calibration needs a finite-variance law",
            ));
        }
        if config.scaling.pilot_reps < levytree_core::gwgen::CALIBRATION_MIN_PILOTS {
            errs.push(ConfigError::new(
                "scaling.pilot_reps",
                format!(
                    "must be >= {}, got {}",
                    levytree_core::gwgen::CALIBRATION_MIN_PILOTS,
                    config.scaling.pilot_reps
                ),
            ));
        }
        errs
    }

    fn run(&self, ctx: &mut RunContext) -> Result<Artifacts> {
        let law = ctx.config.offspring.build()?;
        let heights = ctx.stage("pilots", |c| {
            pilot_heights(law.as_ref(), c.n, c.scaling.pilot_reps, c.master_seed)
        })?;
        let cal = calibration_from_unit_heights(&heights, ctx.config.n)?;
        let mut samples = Table::new([
            ("pilot_id", "pilot index"),
            ("unit_height", "mean vertex depth over sqrt(n)"),
        ]);
        for (i, h) in heights.iter().enumerate() {
            samples.push(&[i.to_string(), fmt_f64(*h)]);
        }
        let mut art = Artifacts {
            samples,
            ..Default::default()
        };
        art.estimate("calibration", cal);
        art.sample_counts.insert("pilots".into(), heights.len());
        Ok(art)
    }
}
