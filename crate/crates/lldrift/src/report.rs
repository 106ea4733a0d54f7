//! Experiment reports and their on-disk layout.
//!
//! A report directory holds
//!
//! * `replicates_<schedule>.csv`: `replicate,seed,x,method,estimate,error,std_error,degenerate`
//! * `summary.csv`: `schedule,x,method,statistic,value`
//! * `checks.csv`: `check,acceptance,passed,value,threshold,detail`
//! * `manifest.json`: configuration snapshot, its content hash, software version
//!
//! Reals are written with 17 significant digits in a locale-independent
//! format so every file parses back to the exact same `f64`.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::Error;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub const REPLICATE_HEADER: [&str; 8] = [
    "replicate",
    "seed",
    "x",
    "method",
    "estimate",
    "error",
    "std_error",
    "degenerate",
];
pub const SUMMARY_HEADER: [&str; 5] = ["schedule", "x", "method", "statistic", "value"];
pub const CHECK_HEADER: [&str; 6] = ["check", "acceptance", "passed", "value", "threshold", "detail"];

/// `{:.16e}`: 17 significant digits, round-trips exactly.
pub fn format_real(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn format_opt(v: Option<f64>) -> String {
    v.map(format_real).unwrap_or_default()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplicateRecord {
    pub schedule: usize,
    pub replicate: usize,
    pub seed: u64,
    pub x: f64,
    pub method: String,
    pub estimate: Option<f64>,
    pub error: Option<f64>,
    pub std_error: Option<f64>,
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub schedule: Option<usize>,
    pub x: Option<f64>,
    pub method: String,
    pub statistic: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    /// Acceptance-labelled checks decide the exit status.
    pub acceptance: bool,
    pub passed: bool,
    pub value: f64,
    pub threshold: f64,
    pub detail: String,
}

impl Check {
    /// Passes when `value <= threshold`.
    pub fn at_most(
        name: impl Into<String>,
        acceptance: bool,
        value: f64,
        threshold: f64,
        detail: impl Into<String>,
    ) -> Self {
        Check {
            name: name.into(),
            acceptance,
            passed: value <= threshold,
            value,
            threshold,
            detail: detail.into(),
        }
    }

    /// Passes when `value >= threshold`.
    pub fn at_least(
        name: impl Into<String>,
        acceptance: bool,
        value: f64,
        threshold: f64,
        detail: impl Into<String>,
    ) -> Self {
        Check {
            name: name.into(),
            acceptance,
            passed: value >= threshold,
            value,
            threshold,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Manifest {
    pub kind: String,
    pub software: String,
    pub version: String,
    /// `sha256("blob <len>\0" + config)`, the git object hash of the config text.
    pub config_hash: String,
    pub config: String,
    pub notes: Vec<String>,
    pub files: Vec<String>,
}

/// Git-style blob hash (SHA-256 object format) of `content`.
pub fn content_hash(content: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(format!("blob {}\0", content.len()).as_bytes());
    hasher.update(content.as_bytes());
    hasher.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// Records for one schedule, in replicate order.
pub fn write_replicates(path: &Path, records: &[&ReplicateRecord]) -> Result<(), Error> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::io(path, e))?;
    w.write_record(REPLICATE_HEADER).map_err(|e| Error::io(path, e))?;
    for r in records {
        w.write_record([
            r.replicate.to_string(),
            r.seed.to_string(),
            format_real(r.x),
            r.method.clone(),
            format_opt(r.estimate),
            format_opt(r.error),
            format_opt(r.std_error),
            r.degenerate.to_string(),
        ])
        .map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn parse_opt(field: &str, path: &Path, line: u64) -> Result<Option<f64>, Error> {
    if field.is_empty() {
        return Ok(None);
    }
    field
        .parse()
        .map(Some)
        .map_err(|_| Error::Format(format!("{}:{line}: `{field}` is not a number", path.display())))
}

fn parse_field<T: std::str::FromStr>(field: &str, path: &Path, line: u64) -> Result<T, Error> {
    field
        .parse()
        .map_err(|_| Error::Format(format!("{}:{line}: cannot parse `{field}`", path.display())))
}

/// Read a per-replicate CSV written by [`write_replicates`].
pub fn read_replicates(path: &Path, schedule: usize) -> Result<Vec<ReplicateRecord>, Error> {
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::io(path, e))?;
    let header = r.headers().map_err(|e| Error::io(path, e))?.clone();
    if header.iter().ne(REPLICATE_HEADER) {
        return Err(Error::Format(format!("{}: unexpected header", path.display())));
    }
    let mut out = Vec::new();
    for row in r.records() {
        let row = row.map_err(|e| Error::io(path, e))?;
        let line = row.position().map_or(0, |p| p.line());
        out.push(ReplicateRecord {
            schedule,
            replicate: parse_field(&row[0], path, line)?,
            seed: parse_field(&row[1], path, line)?,
            x: parse_field(&row[2], path, line)?,
            method: row[3].to_string(),
            estimate: parse_opt(&row[4], path, line)?,
            error: parse_opt(&row[5], path, line)?,
            std_error: parse_opt(&row[6], path, line)?,
            degenerate: parse_field(&row[7], path, line)?,
        });
    }
    Ok(out)
}

pub fn write_summary(path: &Path, rows: &[SummaryRow]) -> Result<(), Error> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::io(path, e))?;
    w.write_record(SUMMARY_HEADER).map_err(|e| Error::io(path, e))?;
    for s in rows {
        w.write_record([
            s.schedule.map(|v| v.to_string()).unwrap_or_default(),
            format_opt(s.x),
            s.method.clone(),
            s.statistic.clone(),
            format_real(s.value),
        ])
        .map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_summary(path: &Path) -> Result<Vec<SummaryRow>, Error> {
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for row in r.records() {
        let row = row.map_err(|e| Error::io(path, e))?;
        let line = row.position().map_or(0, |p| p.line());
        out.push(SummaryRow {
            schedule: if row[0].is_empty() {
                None
            } else {
                Some(parse_field(&row[0], path, line)?)
            },
            x: parse_opt(&row[1], path, line)?,
            method: row[2].to_string(),
            statistic: row[3].to_string(),
            value: parse_field(&row[4], path, line)?,
        });
    }
    Ok(out)
}

pub fn write_checks(path: &Path, checks: &[Check]) -> Result<(), Error> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::io(path, e))?;
    w.write_record(CHECK_HEADER).map_err(|e| Error::io(path, e))?;
    for c in checks {
        w.write_record([
            c.name.clone(),
            c.acceptance.to_string(),
            c.passed.to_string(),
            format_real(c.value),
            format_real(c.threshold),
            c.detail.clone(),
        ])
        .map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn replicate_file_name(schedule: usize) -> String {
    format!("replicates_{schedule}.csv")
}

/// Write all report files into `dir` (created if missing). Returns the
/// written paths.
#[allow(clippy::too_many_arguments)]
pub fn write_report_files(
    dir: &Path,
    kind: &str,
    config_text: &str,
    schedules: usize,
    records: &[ReplicateRecord],
    summaries: &[SummaryRow],
    checks: &[Check],
    notes: &[String],
) -> Result<Vec<PathBuf>, Error> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut files = Vec::new();
    if !records.is_empty() {
        for s in 0..schedules {
            let path = dir.join(replicate_file_name(s));
            let rows: Vec<&ReplicateRecord> = records.iter().filter(|r| r.schedule == s).collect();
            write_replicates(&path, &rows)?;
            files.push(path);
        }
    }
    let summary = dir.join("summary.csv");
    write_summary(&summary, summaries)?;
    files.push(summary);
    let check_path = dir.join("checks.csv");
    write_checks(&check_path, checks)?;
    files.push(check_path);

    let manifest = Manifest {
        kind: kind.to_string(),
        software: env!("CARGO_PKG_NAME").to_string(),
        version: VERSION.to_string(),
        config_hash: content_hash(config_text),
        config: config_text.to_string(),
        notes: notes.to_vec(),
        files: files
            .iter()
            .filter_map(|p| p.file_name().map(|f| f.to_string_lossy().into_owned()))
            .collect(),
    };
    let manifest_path = dir.join("manifest.json");
    let text = serde_json::to_string_pretty(&manifest).map_err(|e| Error::Format(e.to_string()))?;
    fs::write(&manifest_path, text + "\n").map_err(|e| Error::io(&manifest_path, e))?;
    files.push(manifest_path);
    Ok(files)
}
