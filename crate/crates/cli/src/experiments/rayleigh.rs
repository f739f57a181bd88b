//! Height of a mass-picked vertex against the Rayleigh law.

use levytree_core::rng::stream;
use levytree_core::stats::{ks_one_sample, rayleigh_cdf, KS_MIN_SAMPLES};

use super::{mean_of, par_replicas, resolve_plan, sample_set, sample_tree, validate_gw};
use crate::config::ExperimentConfig;
use crate::error::{ConfigError, Result};
use crate::output::{fmt_f64, Artifacts, NamedKs, Table};
use crate::registry::{Experiment, RunContext};

pub struct Rayleigh;

impl Experiment for Rayleigh {
    fn name(&self) -> &'static str {
        "rayleigh"
    }

    fn about(&self) -> &'static str {
        "height of a mass-picked vertex, tested against 1 - exp(-x^2/2)"
    }

    fn validate(&self, config: &ExperimentConfig) -> Vec<ConfigError> {
        let mut errs = Vec::new();
        validate_gw(config, &mut errs);
        errs
    }

    fn run(&self, ctx: &mut RunContext) -> Result<Artifacts> {
        let law = ctx.config.offspring.build()?;
        let (plan, cal) = resolve_plan(ctx, law.as_ref())?;
        let rows = ctx.stage("replicas", |c| {
            par_replicas(c.replicas, |r| {
                let (_, tree, l_n) = sample_tree(law.as_ref(), &plan, c.master_seed, r, "tree-a")?;
                let v = tree.sample_vertex_by_mass(&mut stream(c.master_seed, r, "vertex"))?;
                Ok((r, tree.height_of(v)?, l_n))
            })
        })?;
        let mut samples = Table::new([
            ("replica_id", "replica index"),
            ("H", "height of a mass-picked vertex"),
            ("L_n", "total length of the rescaled tree"),
        ]);
        for (r, h, l) in &rows {
            samples.push(&[r.to_string(), fmt_f64(*h), fmt_f64(*l)]);
        }
        let mut art = Artifacts {
            samples,
            ..Default::default()
        };
        let h: Vec<f64> = rows.iter().map(|r| r.1).collect();
        art.estimate("edge_scale", plan.edge_scale);
        art.estimate("calibration", cal);
        art.estimate("mean_H", mean_of("H", h.clone())?);
        if h.len() >= KS_MIN_SAMPLES {
            let set = sample_set("H", h, &ctx.config)?;
            art.tests.push(NamedKs {
                name: "H_vs_rayleigh".into(),
                report: ks_one_sample(&set, rayleigh_cdf, ctx.config.test.alpha)?,
            });
        }
        art.sample_counts.insert("replicas".into(), rows.len());
        Ok(art)
    }
}
