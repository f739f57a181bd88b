//! Pruning time against the height of a mass-picked leaf, replica by
//! replica, together with their atom configurations.

use levytree_core::record::assign_marks;
use levytree_core::regraft::{bismut_summary, regraft_summary, RegraftSummary, SummaryKind};
use levytree_core::rng::stream;
use levytree_core::stats::{ks_one_sample, ks_two_sample, rayleigh_cdf};

use super::{
    mean_of, par_replicas, resolve_plan, sample_set, sample_tree, summary_table, validate_gw,
};
use crate::config::ExperimentConfig;
use crate::error::{ConfigError, Result};
use crate::output::{fmt_f64, Artifacts, NamedKs, Table};
use crate::registry::{Experiment, RunContext};

pub struct Theorem31;

#[derive(Debug, Clone, PartialEq)]
pub struct Theorem31Row {
    pub replica: u64,
    pub theta: f64,
    pub h: f64,
    pub sigma_check: f64,
    pub l_n: f64,
    pub regraft: RegraftSummary,
    pub bismut: RegraftSummary,
}

impl Experiment for Theorem31 {
    fn name(&self) -> &'static str {
        "theorem31"
    }

    fn about(&self) -> &'static str {
        "Theta of a marked tree against the height of a mass-picked leaf of an independent tree"
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
        let rows = ctx.stage("replicas", |c| {
            par_replicas(c.replicas, |r| {
                let (_, tree_a, l_n) =
                    sample_tree(law.as_ref(), &plan, c.master_seed, r, "tree-a")?;
                let mass = tree_a.total_mass();
                let marked = assign_marks(tree_a, c.beta, &mut stream(c.master_seed, r, "marks"))?;
                let decomp = marked.decompose_classes()?;
                let regraft = regraft_summary(&decomp, &c.thresholds)?;

                let (_, tree_b, _) = sample_tree(law.as_ref(), &plan, c.master_seed, r, "tree-b")?;
                let leaf = tree_b.sample_leaf_by_mass(&mut stream(c.master_seed, r, "leaf"))?;
                let bismut = bismut_summary(&tree_b, leaf, &c.thresholds)?;
                Ok(Theorem31Row {
                    replica: r,
                    theta: decomp.theta_total,
                    h: bismut.branch_len,
                    sigma_check: decomp.total_sigma() - mass,
                    l_n,
                    regraft,
                    bismut,
                })
            })
        })?;

        ctx.stage("analysis", |c| {
            let mut art = Artifacts::default();
            let mut samples = Table::new([
                ("replica_id", "replica index"),
                ("Theta", "mass-integral of record times of tree A"),
                ("H", "height of a mass-picked leaf of tree B"),
                (
                    "sigma_check",
                    "sum of class masses minus total mass of tree A",
                ),
                ("L_n", "total length of rescaled tree A"),
            ]);
            for row in &rows {
                samples.push(&[
                    row.replica.to_string(),
                    fmt_f64(row.theta),
                    fmt_f64(row.h),
                    fmt_f64(row.sigma_check),
                    fmt_f64(row.l_n),
                ]);
            }
            art.samples = samples;
            art.summary = Some(summary_table(
                &c.thresholds,
                rows.iter().flat_map(|r| {
                    [
                        (r.replica, SummaryKind::Regraft, r.regraft.clone()),
                        (r.replica, SummaryKind::Bismut, r.bismut.clone()),
                    ]
                }),
            ));

            let theta: Vec<f64> = rows.iter().map(|r| r.theta).collect();
            let h: Vec<f64> = rows.iter().map(|r| r.h).collect();
            art.sample_counts.insert("replicas".into(), rows.len());
            art.estimate("edge_scale", plan.edge_scale);
            art.estimate("calibration", cal);
            art.estimate("mean_Theta", mean_of("Theta", theta.clone())?);
            art.estimate("mean_H", mean_of("H", h.clone())?);
            art.estimate("rayleigh_mean", levytree_core::gwgen::rayleigh_mean());
            art.estimate(
                "max_abs_sigma_check",
                rows.iter().map(|r| r.sigma_check.abs()).fold(0.0, f64::max),
            );

            if rows.len() >= levytree_core::stats::KS_MIN_SAMPLES {
                let alpha = c.test.alpha;
                let ts = sample_set("Theta", theta, c)?;
                let hs = sample_set("H", h, c)?;
                art.tests.push(NamedKs {
                    name: "H_vs_rayleigh".into(),
                    report: ks_one_sample(&hs, rayleigh_cdf, alpha)?,
                });
                art.tests.push(NamedKs {
                    name: "Theta_vs_rayleigh".into(),
                    report: ks_one_sample(&ts, rayleigh_cdf, alpha)?,
                });
                art.tests.push(NamedKs {
                    name: "Theta_vs_H".into(),
                    report: ks_two_sample(&ts, &hs, alpha)?,
                });
                for (k, eps) in c.thresholds.iter().enumerate() {
                    let reg = rows.iter().map(|r| r.regraft.counts[k] as f64).collect();
                    let bis = rows.iter().map(|r| r.bismut.counts[k] as f64).collect();
                    art.tests.push(NamedKs {
                        name: format!("atom_counts_ge_{eps}"),
                        report: ks_two_sample(
                            &sample_set("regraft", reg, c)?,
                            &sample_set("bismut", bis, c)?,
                            alpha,
                        )?,
                    });
                }
            }
            Ok(art)
        })
    }
}
