//! The built-in experiments and the pieces they share.

mod calibrate;
mod corollary32;
mod cuts;
mod gen;
mod mark;
mod rayleigh;
mod theorem31;
mod zmoments;

pub use calibrate::Calibrate;
pub use corollary32::Corollary32;
pub use cuts::Cuts;
pub use gen::Gen;
pub use mark::Mark;
pub use rayleigh::Rayleigh;
pub use theorem31::{Theorem31, Theorem31Row};
pub use zmoments::ZMoments;

use levytree_core::gwgen::{
    calibration_from_unit_heights, mean_vertex_depth, rescale, sample_conditioned_tree,
    Calibration, OffspringDistribution, RawTree, ScalingPlan, CALIBRATION_MIN_PILOTS,
};
use levytree_core::regraft::{RegraftSummary, SummaryKind};
use levytree_core::rng::stream;
use levytree_core::stats::{moments, MomentEstimate, SampleSet};
use levytree_core::tree::WTree;
use rayon::prelude::*;

use crate::config::ExperimentConfig;
use crate::error::{ConfigError, Result};
use crate::output::Table;
use crate::registry::RunContext;

/// Runs `f` for every replica on the current pool; results come back in
/// replica order whatever the scheduling.
pub(crate) fn par_replicas<T: Send>(
    count: usize,
    f: impl Fn(u64) -> Result<T> + Sync,
) -> Result<Vec<T>> {
    (0..count as u64).into_par_iter().map(&f).collect()
}

/// Shared checks for experiments that sample Galton-Watson trees.
pub(crate) fn validate_gw(config: &ExperimentConfig, errs: &mut Vec<ConfigError>) {
    config.require_tree_size(errs);
    if config.scaling.edge_scale.is_none() {
        if !config.offspring.is_finite_variance() {
            errs.push(ConfigError::new(
                "scaling.edge_scale",
                "required for infinite-variance offspring laws",
            ));
        }
        if config.scaling.pilot_reps < CALIBRATION_MIN_PILOTS {
            errs.push(ConfigError::new(
                "scaling.pilot_reps",
                format!(
                    "must be >= {CALIBRATION_MIN_PILOTS}, got {}",
                    config.scaling.pilot_reps
                ),
            ));
        }
    }
}

/// Gamma of the target mechanism, 2 outside the stable family.
pub(crate) fn target_gamma(config: &ExperimentConfig) -> f64 {
    config.mechanism.stable_index().map_or(2.0, |(g, _)| g)
}

/// Unit heights of independent pilot trees, one stream per pilot.
pub(crate) fn pilot_heights(
    law: &dyn OffspringDistribution,
    n: usize,
    pilots: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    let root_n = (n as f64).sqrt();
    par_replicas(pilots, |i| {
        let raw = sample_conditioned_tree(law, n, &mut stream(seed, i, "pilot"))?;
        Ok(mean_vertex_depth(&raw) / root_n)
    })
}

pub(crate) fn calibrate(
    config: &ExperimentConfig,
    law: &dyn OffspringDistribution,
) -> Result<Calibration> {
    let h = pilot_heights(law, config.n, config.scaling.pilot_reps, config.master_seed)?;
    Ok(calibration_from_unit_heights(&h, config.n)?)
}

/// The scaling plan of the run: the configured edge scale, or the
/// calibrated one.
pub(crate) fn resolve_plan(
    ctx: &mut RunContext,
    law: &dyn OffspringDistribution,
) -> Result<(ScalingPlan, Option<Calibration>)> {
    let (edge_scale, cal) = match ctx.config.scaling.edge_scale {
        Some(s) => (s, None),
        None => {
            let cal = ctx.stage("calibrate", |c| calibrate(c, law))?;
            (cal.edge_scale, Some(cal))
        }
    };
    let c = &ctx.config;
    let plan = ScalingPlan::unit_mass(c.n, edge_scale, c.scaling.node_mass_scale, target_gamma(c))?;
    Ok((plan, cal))
}

/// One conditioned tree on the `(replica, tag)` stream, raw and rescaled.
pub(crate) fn sample_tree(
    law: &dyn OffspringDistribution,
    plan: &ScalingPlan,
    seed: u64,
    replica: u64,
    tag: &str,
) -> Result<(RawTree, WTree, f64)> {
    let raw = sample_conditioned_tree(law, plan.n, &mut stream(seed, replica, tag))?;
    let (tree, l_n) = rescale(&raw, plan)?;
    Ok((raw, tree, l_n))
}

pub(crate) fn sample_set(
    label: &str,
    values: Vec<f64>,
    config: &ExperimentConfig,
) -> Result<SampleSet> {
    let n = values.len() as u64;
    Ok(
        SampleSet::new(label, values)?.with_seed_info(levytree_core::stats::SeedInfo {
            master_seed: config.master_seed,
            replica_start: 0,
            replica_end: n,
        }),
    )
}

pub(crate) fn mean_of(label: &str, values: Vec<f64>) -> Result<Option<MomentEstimate>> {
    if values.len() < 2 {
        return Ok(None);
    }
    Ok(moments(&SampleSet::new(label, values)?, &[1])?.pop())
}

pub(crate) fn summary_table(
    thresholds: &[f64],
    rows: impl IntoIterator<Item = (u64, SummaryKind, RegraftSummary)>,
) -> Table {
    let header = RegraftSummary::csv_header(thresholds);
    let columns: Vec<(String, String)> = header
        .split(',')
        .map(|c| {
            let doc = match c {
                "replica_id" => "replica index".to_string(),
                "kind" => "regraft or bismut".to_string(),
                "branch_len" => "Theta for regraft, H for bismut".to_string(),
                "n_atoms" => "number of (position, mass) atoms".to_string(),
                other => format!(
                    "atoms with mass >= {}",
                    other.trim_start_matches("count_ge_")
                ),
            };
            (c.to_string(), doc)
        })
        .collect();
    let mut t = Table::new(columns);
    for (id, kind, s) in rows {
        t.rows.push(s.csv_row(id, kind));
    }
    t
}
