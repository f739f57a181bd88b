//! Config in, artifact files out.

use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{Map, Value};

use crate::config::ExperimentConfig;
use crate::error::{CliError, Result};
use crate::output::{self, Artifacts, MANIFEST_FILE, REPORT_FILE, SAMPLES_FILE, SUMMARY_FILE};
use crate::registry::{Registry, RunContext};

pub const THREADS_ENV: &str = "LEVYTREE_THREADS";

#[derive(Debug)]
pub struct RunOutcome {
    pub files: Vec<PathBuf>,
    pub artifacts: Artifacts,
}

/// Counts and timings that end up in the manifest next to the config echo.
#[derive(Debug, Clone, Default, Serialize)]
pub struct Metrics {
    pub sample_counts: std::collections::BTreeMap<String, usize>,
    pub timings: Vec<(String, f64)>,
}

pub fn manifest_json(config: &ExperimentConfig, metrics: &Metrics) -> String {
    let mut m = Map::new();
    m.insert(
        "code_version".into(),
        Value::from(env!("CARGO_PKG_VERSION")),
    );
    m.insert(
        "config".into(),
        serde_json::to_value(config).expect("config serializes"),
    );
    m.insert("kind".into(), Value::from(config.kind.clone()));
    m.insert("master_seed".into(), Value::from(config.master_seed));
    if !metrics.sample_counts.is_empty() {
        m.insert(
            "sample_counts".into(),
            serde_json::to_value(&metrics.sample_counts).expect("counts"),
        );
    }
    if !metrics.timings.is_empty() {
        let t: Map<String, Value> = metrics
            .timings
            .iter()
            .map(|(k, v)| (k.clone(), Value::from(*v)))
            .collect();
        m.insert("timings".into(), Value::Object(t));
    }
    let mut s = serde_json::to_string_pretty(&Value::Object(m)).expect("manifest serializes");
    s.push('\n');
    s
}

/// Writes `manifest.json` into `dir`, creating it if needed.
pub fn emit_manifest(dir: &Path, config: &ExperimentConfig, metrics: &Metrics) -> Result<PathBuf> {
    let files = output::write_all(
        dir,
        &[(PathBuf::from(MANIFEST_FILE), manifest_json(config, metrics))],
    )?;
    Ok(files.into_iter().next().expect("one file"))
}

/// Thread count from the flag, else from `LEVYTREE_THREADS`.
pub fn resolve_threads(flag: Option<usize>) -> Result<Option<usize>> {
    if flag.is_some() {
        return Ok(flag);
    }
    match std::env::var(THREADS_ENV) {
        Ok(v) => v.trim().parse::<usize>().map(Some).map_err(|_| {
            CliError::Config(vec![crate::error::ConfigError::new(
                THREADS_ENV,
                format!("not a thread count: {v:?}"),
            )])
        }),
        Err(_) => Ok(None),
    }
}

/// Validates, runs on a worker pool of `threads` workers (rayon's default
/// when `None`), and writes samples, summary, report and manifest into
/// `config.output_dir`. Nothing is left behind when the run fails.
pub fn run_experiment(
    registry: &Registry,
    config: ExperimentConfig,
    threads: Option<usize>,
) -> Result<RunOutcome> {
    let exp = registry
        .get(&config.kind)
        .ok_or_else(|| CliError::UnknownExperiment(config.kind.clone()))?;
    let mut errs = config.validate_common();
    errs.extend(exp.validate(&config));
    if !errs.is_empty() {
        return Err(CliError::Config(errs));
    }
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(k) = threads {
        builder = builder.num_threads(k);
    }
    let pool = builder.build().map_err(|e| CliError::Pool(e.to_string()))?;

    let start = std::time::Instant::now();
    let mut ctx = RunContext::new(config);
    let artifacts = pool.install(|| exp.run(&mut ctx))?;

    let mut files = vec![(PathBuf::from(SAMPLES_FILE), artifacts.samples.render())];
    if let Some(s) = &artifacts.summary {
        files.push((PathBuf::from(SUMMARY_FILE), s.render()));
    }
    files.push((
        PathBuf::from(REPORT_FILE),
        artifacts.report_json(exp.name()),
    ));
    files.extend(artifacts.extra.iter().cloned());
    let mut timings = ctx.timings().to_vec();
    timings.push(("total".into(), start.elapsed().as_secs_f64()));
    let metrics = Metrics {
        sample_counts: artifacts.sample_counts.clone(),
        timings,
    };
    files.push((
        PathBuf::from(MANIFEST_FILE),
        manifest_json(&ctx.config, &metrics),
    ));

    let written = output::write_all(&ctx.config.output_dir, &files)?;
    Ok(RunOutcome {
        files: written,
        artifacts,
    })
}
