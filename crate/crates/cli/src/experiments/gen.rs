//! Conditioned Galton-Watson trees, rescaled, written as tree JSON lines.

use std::path::PathBuf;

use super::{par_replicas, resolve_plan, sample_tree, validate_gw};
use crate::config::ExperimentConfig;
use crate::error::{ConfigError, Result};
use crate::output::{fmt_f64, Artifacts, Table};
use crate::registry::{Experiment, RunContext};

pub struct Gen;

pub const TREES_FILE: &str = "trees.jsonl";

impl Experiment for Gen {
    fn name(&self) -> &'static str {
        "gen"
    }

    fn about(&self) -> &'static str {
        "sample and rescale conditioned Galton-Watson trees"
    }

    fn validate(&self, config: &ExperimentConfig) -> Vec<ConfigError> {
        let mut errs = Vec::new();
        validate_gw(config, &mut errs);
        errs
    }

    fn run(&self, ctx: &mut RunContext) -> Result<Artifacts> {
        let law = ctx.config.offspring.build()?;
        let (plan, cal) = resolve_plan(ctx, law.as_ref())?;
        let trees = ctx.stage("replicas", |c| {
            par_replicas(c.replicas, |r| {
                let (_, tree, l_n) = sample_tree(law.as_ref(), &plan, c.master_seed, r, "tree-a")?;
                Ok((r, tree, l_n))
            })
        })?;
        let mut samples = Table::new([
            ("replica_id", "replica index"),
            ("n", "vertex count"),
            ("L_n", "total length"),
            ("height", "largest vertex height"),
            ("leaves", "leaf count"),
            ("total_mass", "total vertex mass"),
        ]);
        let mut jsonl = String::new();
        for (r, tree, l_n) in &trees {
            let height = tree.heights().iter().copied().fold(0.0, f64::max);
            let leaves = (0..tree.len())
                .filter(|&v| tree.is_leaf(v) && v != tree.root())
                .count();
            samples.push(&[
                r.to_string(),
                tree.len().to_string(),
                fmt_f64(*l_n),
                fmt_f64(height),
                leaves.to_string(),
                fmt_f64(tree.total_mass()),
            ]);
            jsonl.push_str(&tree.to_json());
            jsonl.push('\n');
        }
        let mut art = Artifacts {
            samples,
            ..Default::default()
        };
        art.extra.push((PathBuf::from(TREES_FILE), jsonl));
        art.estimate("edge_scale", plan.edge_scale);
        art.estimate("calibration", cal);
        art.sample_counts.insert("trees".into(), trees.len());
        Ok(art)
    }
}
