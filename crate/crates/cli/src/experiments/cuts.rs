//! Cut counts of edge cutting and vertex pruning.

use levytree_core::gwgen::{sample_conditioned_tree, RawTree};
use levytree_core::record::{count_cuts_edges, count_cuts_vertices};
use levytree_core::rng::stream;

use super::{mean_of, par_replicas};
use crate::config::{CutShape, ExperimentConfig};
use crate::error::{ConfigError, Result};
use crate::output::{Artifacts, Table};
use crate::registry::{Experiment, RunContext};

pub struct Cuts;

impl Experiment for Cuts {
    fn name(&self) -> &'static str {
        "cuts"
    }

    fn about(&self) -> &'static str {
        "cut counts X_n (edge cutting) and Xtilde_n (vertex pruning)"
    }

    fn validate(&self, config: &ExperimentConfig) -> Vec<ConfigError> {
        let mut errs = Vec::new();
        config.require_tree_size(&mut errs);
        errs
    }

    fn run(&self, ctx: &mut RunContext) -> Result<Artifacts> {
        let law = ctx.config.offspring.build()?;
        let fixed = match ctx.config.cuts.shape {
            CutShape::Gw => None,
            CutShape::Path => Some(RawTree::path(ctx.config.n)),
            CutShape::Star => Some(RawTree::star(ctx.config.n)),
        };
        let counts = ctx.stage("replicas", |c| {
            par_replicas(c.replicas, |r| {
                let raw = match &fixed {
                    Some(t) => t.clone(),
                    None => sample_conditioned_tree(
                        law.as_ref(),
                        c.n,
                        &mut stream(c.master_seed, r, "tree-a"),
                    )?,
                };
                let x = count_cuts_edges(&raw, &mut stream(c.master_seed, r, "cuts-edges"));
                let xt = count_cuts_vertices(&raw, &mut stream(c.master_seed, r, "cuts-vertices"));
                Ok((r, x, xt))
            })
        })?;
        let mut samples = Table::new([
            ("replica_id", "replica index"),
            ("X_n", "edge cuts until the root is isolated"),
            ("Xtilde_n", "vertex prunings until the root is removed"),
        ]);
        for (r, x, xt) in &counts {
            samples.push(&[r.to_string(), x.to_string(), xt.to_string()]);
        }
        let mut art = Artifacts {
            samples,
            ..Default::default()
        };
        art.estimate(
            "mean_X",
            mean_of("X_n", counts.iter().map(|c| c.1 as f64).collect())?,
        );
        art.estimate(
            "mean_Xtilde",
            mean_of("Xtilde_n", counts.iter().map(|c| c.2 as f64).collect())?,
        );
        art.sample_counts.insert("replicas".into(), counts.len());
        Ok(art)
    }
}
