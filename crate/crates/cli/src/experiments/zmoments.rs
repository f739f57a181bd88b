//! Moments of the pruning count over tree length, and of the height of a
//! mass-picked vertex, next to the closed-form moments of Z.

use levytree_core::mechanism::z_moment;
use levytree_core::record::count_cuts_vertices;
use levytree_core::rng::stream;
use levytree_core::stats::{moments, MomentEstimate, SampleSet};
use serde::Serialize;

use super::{par_replicas, resolve_plan, sample_tree, validate_gw};
use crate::config::ExperimentConfig;
use crate::error::{ConfigError, Result};
use crate::output::{fmt_f64, Artifacts, Table};
use crate::registry::{Experiment, RunContext};

pub struct ZMoments;

#[derive(Serialize)]
struct OrderRow {
    order: u32,
    z_moment: f64,
    ratio: MomentEstimate,
    height: MomentEstimate,
}

impl Experiment for ZMoments {
    fn name(&self) -> &'static str {
        "zmoments"
    }

    fn about(&self) -> &'static str {
        "moments of Xtilde_n / L_n and of H against E[Z^k]"
    }

    fn validate(&self, config: &ExperimentConfig) -> Vec<ConfigError> {
        let mut errs = Vec::new();
        validate_gw(config, &mut errs);
        if config.mechanism.stable_index().is_none() {
            errs.push(ConfigError::new(
                "mechanism",
                "must be c0 * l^gamma (quadratic or pure stable)",
            ));
        }
        if config.zmoments.max_order < 1 {
            errs.push(ConfigError::new("zmoments.max_order", "must be >= 1"));
        }
        if config.replicas < 2 {
            errs.push(ConfigError::new(
                "replicas",
                "moment estimates need >= 2 replicas",
            ));
        }
        errs
    }

    fn run(&self, ctx: &mut RunContext) -> Result<Artifacts> {
        let law = ctx.config.offspring.build()?;
        let (plan, cal) = resolve_plan(ctx, law.as_ref())?;
        let rows = ctx.stage("replicas", |c| {
            par_replicas(c.replicas, |r| {
                let (raw, tree, l_n) =
                    sample_tree(law.as_ref(), &plan, c.master_seed, r, "tree-a")?;
                let xt = count_cuts_vertices(&raw, &mut stream(c.master_seed, r, "cuts-vertices"));
                let v = tree.sample_vertex_by_mass(&mut stream(c.master_seed, r, "vertex"))?;
                Ok((r, xt, l_n, tree.height_of(v)?))
            })
        })?;
        let mut samples = Table::new([
            ("replica_id", "replica index"),
            ("Xtilde_n", "vertex prunings until the root is removed"),
            ("L_n", "total length of the rescaled tree"),
            ("ratio", "Xtilde_n / L_n"),
            ("H", "height of a mass-picked vertex"),
        ]);
        for (r, xt, l, h) in &rows {
            samples.push(&[
                r.to_string(),
                xt.to_string(),
                fmt_f64(*l),
                fmt_f64(*xt as f64 / l),
                fmt_f64(*h),
            ]);
        }
        let (gamma, c0) = ctx.config.mechanism.stable_index().expect("validated");
        let orders: Vec<u32> = (1..=ctx.config.zmoments.max_order).collect();
        let ratio = SampleSet::new("ratio", rows.iter().map(|r| r.1 as f64 / r.2).collect())?;
        let height = SampleSet::new("H", rows.iter().map(|r| r.3).collect())?;
        let rm = moments(&ratio, &orders)?;
        let hm = moments(&height, &orders)?;
        let table = orders
            .iter()
            .zip(rm.into_iter().zip(hm))
            .map(|(&k, (ratio, height))| {
                Ok(OrderRow {
                    order: k,
                    z_moment: z_moment(gamma, c0, k)?,
                    ratio,
                    height,
                })
            })
            .collect::<levytree_core::Result<Vec<_>>>()?;
        let mut art = Artifacts {
            samples,
            ..Default::default()
        };
        art.estimate("edge_scale", plan.edge_scale);
        art.estimate("calibration", cal);
        art.estimate("moments", table);
        art.sample_counts.insert("replicas".into(), rows.len());
        Ok(art)
    }
}
