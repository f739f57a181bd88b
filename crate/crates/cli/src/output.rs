//! Plot-ready artifacts: CSV tables with a documenting comment line, and
//! JSON reports.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use levytree_core::stats::KsReport;
use serde::Serialize;
use serde_json::Value;

use crate::error::{CliError, Result};

pub const SAMPLES_FILE: &str = "samples.csv";
pub const SUMMARY_FILE: &str = "summary.csv";
pub const REPORT_FILE: &str = "report.json";
pub const MANIFEST_FILE: &str = "manifest.json";

/// A CSV table. `columns` pairs each header with its one-line description.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub columns: Vec<(String, String)>,
    pub rows: Vec<String>,
}

impl Table {
    pub fn new<S: Into<String>, D: Into<String>>(
        columns: impl IntoIterator<Item = (S, D)>,
    ) -> Self {
        Table {
            columns: columns
                .into_iter()
                .map(|(c, d)| (c.into(), d.into()))
                .collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, fields: &[String]) {
        debug_assert_eq!(fields.len(), self.columns.len());
        self.rows.push(fields.join(","));
    }

    pub fn render(&self) -> String {
        let doc: Vec<String> = self
            .columns
            .iter()
            .map(|(c, d)| format!("{c} = {d}"))
            .collect();
        let header: Vec<&str> = self.columns.iter().map(|(c, _)| c.as_str()).collect();
        let mut out = format!("# columns: {}\n{}\n", doc.join("; "), header.join(","));
        for r in &self.rows {
            out.push_str(r);
            out.push('\n');
        }
        out
    }
}

/// A KS report with the name of the comparison it belongs to.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NamedKs {
    pub name: String,
    #[serde(flatten)]
    pub report: KsReport,
}

/// Everything an experiment produces, held in memory until the run succeeds.
#[derive(Debug, Clone, Default)]
pub struct Artifacts {
    pub samples: Table,
    pub summary: Option<Table>,
    pub tests: Vec<NamedKs>,
    /// Point estimates and anything else worth reporting, keyed by name.
    pub estimates: BTreeMap<String, Value>,
    /// Extra files, relative to the output directory.
    pub extra: Vec<(PathBuf, String)>,
    pub sample_counts: BTreeMap<String, usize>,
}

impl Artifacts {
    pub fn estimate(&mut self, key: &str, value: impl Serialize) {
        self.estimates.insert(
            key.to_string(),
            serde_json::to_value(value).expect("estimate serializes"),
        );
    }

    pub fn report_json(&self, kind: &str) -> String {
        #[derive(Serialize)]
        struct Report<'a> {
            experiment: &'a str,
            tests: &'a [NamedKs],
            estimates: &'a BTreeMap<String, Value>,
        }
        let r = Report {
            experiment: kind,
            tests: &self.tests,
            estimates: &self.estimates,
        };
        let mut s = serde_json::to_string_pretty(&r).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Writes every file or none: on the first failure the files already
/// written are removed again.
pub fn write_all(dir: &Path, files: &[(PathBuf, String)]) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let mut written = Vec::with_capacity(files.len());
    for (rel, contents) in files {
        let path = dir.join(rel);
        let res = path
            .parent()
            .map_or(Ok(()), std::fs::create_dir_all)
            .and_then(|_| std::fs::write(&path, contents));
        if let Err(e) = res {
            remove_files(&written);
            return Err(CliError::io(&path, e));
        }
        written.push(path);
    }
    Ok(written)
}

pub fn remove_files(paths: &[PathBuf]) {
    for p in paths {
        let _ = std::fs::remove_file(p);
    }
}

/// Shortest round-trip decimal for a float column, in exponent form when
/// the positional form would be long.
pub fn fmt_f64(x: f64) -> String {
    let mut s = String::new();
    let a = x.abs();
    if a != 0.0 && a.is_finite() && !(1e-4..1e16).contains(&a) {
        write!(s, "{x:e}").expect("string write");
    } else {
        write!(s, "{x}").expect("string write");
    }
    s
}
