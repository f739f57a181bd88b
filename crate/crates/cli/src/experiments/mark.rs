//! Marks a tree, decomposes it into classes, and writes the decomposition.

use std::path::PathBuf;

use levytree_core::record::assign_marks;
use levytree_core::regraft::{regraft_summary, SummaryKind};
use levytree_core::rng::stream;
use levytree_core::tree::WTree;

use super::{par_replicas, resolve_plan, sample_tree, summary_table, validate_gw};
use crate::config::ExperimentConfig;
use crate::error::{CliError, ConfigError, Result};
use crate::output::{fmt_f64, Artifacts, Table};
use crate::registry::{Experiment, RunContext};

pub struct Mark;

impl Experiment for Mark {
    fn name(&self) -> &'static str {
        "mark"
    }

    fn about(&self) -> &'static str {
        "mark trees (sampled or from input_tree) and decompose them into pruning classes"
    }

    fn validate(&self, config: &ExperimentConfig) -> Vec<ConfigError> {
        let mut errs = Vec::new();
        if config.input_tree.is_none() {
            validate_gw(config, &mut errs);
        }
        errs
    }

    fn run(&self, ctx: &mut RunContext) -> Result<Artifacts> {
        let fixed = match &ctx.config.input_tree {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
                let tree = WTree::from_json(&text).map_err(|e| {
                    CliError::Config(vec![ConfigError::new("input_tree", e.to_string())])
                })?;
                Some(tree)
            }
            None => None,
        };
        let (law, plan) = match &fixed {
            Some(_) => (None, None),
            None => {
                let law = ctx.config.offspring.build()?;
                let (plan, _) = resolve_plan(ctx, law.as_ref())?;
                (Some(law), Some(plan))
            }
        };
        let rows = ctx.stage("replicas", |c| {
            par_replicas(c.replicas, |r| {
                let tree = match (&fixed, &law, &plan) {
                    (Some(t), _, _) => t.clone(),
                    (None, Some(law), Some(plan)) => {
                        sample_tree(law.as_ref(), plan, c.master_seed, r, "tree-a")?.1
                    }
                    _ => unreachable!("either a fixed tree or a sampling plan"),
                };
                let mass = tree.total_mass();
                let l_n = tree.total_length();
                let marked = assign_marks(tree, c.beta, &mut stream(c.master_seed, r, "marks"))?;
                let decomp = marked.decompose_classes()?;
                let summary = regraft_summary(&decomp, &c.thresholds)?;
                Ok((r, l_n, decomp.total_sigma() - mass, decomp, summary))
            })
        })?;

        let mut samples = Table::new([
            ("replica_id", "replica index"),
            ("Theta", "mass-integral of record times"),
            ("sigma_check", "sum of class masses minus total mass"),
            ("n_classes", "number of pruning classes"),
            ("L_n", "total length of the tree"),
        ]);
        let mut art = Artifacts::default();
        for (r, l_n, check, decomp, _) in &rows {
            samples.push(&[
                r.to_string(),
                fmt_f64(decomp.theta_total),
                fmt_f64(*check),
                decomp.classes.len().to_string(),
                fmt_f64(*l_n),
            ]);
            art.extra.push((
                PathBuf::from(format!("decomposition/replica_{r}.csv")),
                decomp.to_csv(),
            ));
        }
        art.samples = samples;
        let thresholds = ctx.config.thresholds.clone();
        art.summary = Some(summary_table(
            &thresholds,
            rows.into_iter()
                .map(|(r, _, _, _, s)| (r, SummaryKind::Regraft, s)),
        ));
        if let Some(p) = plan {
            art.estimate("edge_scale", p.edge_scale);
        }
        art.sample_counts
            .insert("replicas".into(), ctx.config.replicas);
        Ok(art)
    }
}
