//! Counting large classes and summing small ones as estimators of Theta.

use levytree_core::mechanism::{brownian_canonical_tail, brownian_small_mass_mean};
use levytree_core::record::assign_marks;
use levytree_core::regraft::{regraft_summary, RegraftSummary, SummaryKind};
use levytree_core::rng::stream;
use levytree_core::stats::median;
use serde::Serialize;

use super::{par_replicas, resolve_plan, sample_tree, summary_table, validate_gw};
use crate::config::ExperimentConfig;
use crate::error::{ConfigError, Result};
use crate::output::{fmt_f64, Artifacts, Table};
use crate::registry::{Experiment, RunContext};

pub struct Corollary32;

#[derive(Debug, Clone, Serialize)]
struct ThresholdErrors {
    epsilon: f64,
    median_rel_err_count: Option<f64>,
    median_rel_err_small_mass: Option<f64>,
}

impl Experiment for Corollary32 {
    fn name(&self) -> &'static str {
        "corollary32"
    }

    fn about(&self) -> &'static str {
        "large-class counts and small-class mass, normalized by the canonical measure, against Theta"
    }

    fn validate(&self, config: &ExperimentConfig) -> Vec<ConfigError> {
        let mut errs = Vec::new();
        validate_gw(config, &mut errs);
        config.require_brownian(&mut errs);
        errs
    }

    fn run(&self, ctx: &mut RunContext) -> Result<Artifacts> {
        let law = ctx.config.offspring.build()?;
        let (plan, cal) = resolve_plan(ctx, law.as_ref())?;
        let rows: Vec<(u64, f64, f64, f64, RegraftSummary)> = ctx.stage("replicas", |c| {
            par_replicas(c.replicas, |r| {
                let (_, tree, l_n) = sample_tree(law.as_ref(), &plan, c.master_seed, r, "tree-a")?;
                let mass = tree.total_mass();
                let marked = assign_marks(tree, c.beta, &mut stream(c.master_seed, r, "marks"))?;
                let decomp = marked.decompose_classes()?;
                let s = regraft_summary(&decomp, &c.thresholds)?;
                Ok((r, decomp.theta_total, l_n, decomp.total_sigma() - mass, s))
            })
        })?;

        ctx.stage("analysis", |c| {
            let tails: Vec<f64> = c
                .thresholds
                .iter()
                .map(|&e| brownian_canonical_tail(&c.mechanism, e))
                .collect::<levytree_core::Result<_>>()?;
            let small: Vec<f64> = c
                .thresholds
                .iter()
                .map(|&e| brownian_small_mass_mean(&c.mechanism, e))
                .collect::<levytree_core::Result<_>>()?;

            let mut columns: Vec<(String, String)> = vec![
                ("replica_id".into(), "replica index".into()),
                ("Theta".into(), "mass-integral of record times".into()),
                ("L_n".into(), "total length of the rescaled tree".into()),
                (
                    "sigma_check".into(),
                    "sum of class masses minus total mass".into(),
                ),
            ];
            for e in &c.thresholds {
                columns.push((format!("count_ge_{e}"), format!("classes with mass >= {e}")));
                columns.push((
                    format!("rel_err_count_{e}"),
                    "|count / N[sigma > eps] - Theta| / Theta".into(),
                ));
                columns.push((
                    format!("small_mass_le_{e}"),
                    format!("total mass of classes with mass <= {e}"),
                ));
                columns.push((
                    format!("rel_err_small_{e}"),
                    "|small mass / N[sigma 1{sigma <= eps}] - Theta| / Theta".into(),
                ));
            }
            let mut samples = Table::new(columns);
            let k = c.thresholds.len();
            let mut err_count = vec![Vec::with_capacity(rows.len()); k];
            let mut err_small = vec![Vec::with_capacity(rows.len()); k];
            for (r, theta, l_n, check, s) in &rows {
                let mut f = vec![
                    r.to_string(),
                    fmt_f64(*theta),
                    fmt_f64(*l_n),
                    fmt_f64(*check),
                ];
                for i in 0..k {
                    let ec = (s.counts[i] as f64 / tails[i] - theta).abs() / theta;
                    let es = (s.small_mass[i] / small[i] - theta).abs() / theta;
                    err_count[i].push(ec);
                    err_small[i].push(es);
                    f.extend([
                        s.counts[i].to_string(),
                        fmt_f64(ec),
                        fmt_f64(s.small_mass[i]),
                        fmt_f64(es),
                    ]);
                }
                samples.push(&f);
            }

            let mut art = Artifacts {
                samples,
                ..Default::default()
            };
            art.summary = Some(summary_table(
                &c.thresholds,
                rows.iter()
                    .map(|(r, _, _, _, s)| (*r, SummaryKind::Regraft, s.clone())),
            ));
            let per_eps: Vec<ThresholdErrors> = (0..k)
                .map(|i| ThresholdErrors {
                    epsilon: c.thresholds[i],
                    median_rel_err_count: median(&err_count[i]),
                    median_rel_err_small_mass: median(&err_small[i]),
                })
                .collect();
            art.estimate("edge_scale", plan.edge_scale);
            art.estimate("calibration", cal);
            art.estimate("thresholds", per_eps);
            art.sample_counts.insert("replicas".into(), rows.len());
            Ok(art)
        })
    }
}
