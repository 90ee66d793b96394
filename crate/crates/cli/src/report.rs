//! Deterministic rendering of job reports: CSV tables, `summary.json` and
//! `summary.txt`. No timestamps, no locale, 17 significant digits.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{Map, Value};

use crate::error::CliError;
use crate::run::{Cell, JobReport, Table};
use crate::schema::SCHEMA_VERSION;

/// Outcome of one job as recorded in the summaries.
#[derive(Debug)]
pub enum JobOutcome {
    Done(JobReport),
    Failed {
        name: String,
        kind: &'static str,
        error: String,
    },
}

impl JobOutcome {
    pub fn name(&self) -> &str {
        match self {
            JobOutcome::Done(r) => &r.name,
            JobOutcome::Failed { name, .. } => name,
        }
    }

    pub fn is_failure(&self) -> bool {
        matches!(self, JobOutcome::Failed { .. })
    }
}

pub fn format_real(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x:.16e}")
    }
}

pub fn render_csv(table: &Table) -> String {
    let mut out = table.header.join(",");
    out.push('\n');
    for row in &table.rows {
        let cells: Vec<String> = row
            .iter()
            .map(|c| match c {
                Cell::Int(i) => i.to_string(),
                Cell::Real(x) => format_real(*x),
                Cell::Text(s) => s.clone(),
            })
            .collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn csv_file_name(job: &str, table: &Table) -> String {
    match table.suffix {
        Some(s) => format!("{job}.{s}.csv"),
        None => format!("{job}.csv"),
    }
}

pub fn summary_json(outcomes: &[JobOutcome]) -> String {
    let mut jobs = Map::new();
    for o in outcomes {
        let entry = match o {
            JobOutcome::Done(r) => {
                let mut m = Map::new();
                m.insert("kind".into(), Value::from(r.kind));
                m.insert("status".into(), Value::from("ok"));
                m.insert("result".into(), r.summary.clone());
                let files: Vec<Value> = r
                    .tables
                    .iter()
                    .map(|t| Value::from(csv_file_name(&r.name, t)))
                    .collect();
                m.insert("files".into(), Value::Array(files));
                m
            }
            JobOutcome::Failed { kind, error, .. } => {
                let mut m = Map::new();
                m.insert("kind".into(), Value::from(*kind));
                m.insert("status".into(), Value::from("failed"));
                m.insert("error".into(), Value::from(error.as_str()));
                m
            }
        };
        jobs.insert(o.name().to_string(), Value::Object(entry));
    }
    let mut root = Map::new();
    root.insert("schema_version".into(), Value::from(SCHEMA_VERSION));
    root.insert("jobs".into(), Value::Object(jobs));
    let mut s = serde_json::to_string_pretty(&Value::Object(root)).expect("summary serializes");
    s.push('\n');
    s
}

fn flatten(prefix: &str, v: &Value, out: &mut String) {
    match v {
        Value::Object(m) => {
            for (k, v) in m {
                let key = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                flatten(&key, v, out);
            }
        }
        Value::Number(n) => match n.as_f64() {
            Some(x) if !n.is_u64() && !n.is_i64() => {
                let _ = writeln!(out, "  {prefix} = {}", format_real(x));
            }
            _ => {
                let _ = writeln!(out, "  {prefix} = {n}");
            }
        },
        Value::String(s) => {
            let _ = writeln!(out, "  {prefix} = {s}");
        }
        other => {
            let _ = writeln!(out, "  {prefix} = {other}");
        }
    }
}

pub fn summary_text(outcomes: &[JobOutcome]) -> String {
    let mut out = String::new();
    for o in outcomes {
        match o {
            JobOutcome::Done(r) => {
                let _ = writeln!(out, "[{}] {}: ok", r.name, r.kind);
                flatten("", &r.summary, &mut out);
            }
            JobOutcome::Failed { name, kind, error } => {
                let _ = writeln!(out, "[{name}] {kind}: FAILED: {error}");
            }
        }
    }
    out
}

fn write(path: PathBuf, contents: &str) -> Result<PathBuf, CliError> {
    fs::write(&path, contents).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Ok(path)
}

/// Writes every CSV table plus both summaries into `dir`; returns the paths
/// in write order.
pub fn write_reports(dir: &Path, outcomes: &[JobOutcome]) -> Result<Vec<PathBuf>, CliError> {
    fs::create_dir_all(dir).map_err(|source| CliError::Io {
        path: dir.display().to_string(),
        source,
    })?;
    let mut written = Vec::new();
    for o in outcomes {
        if let JobOutcome::Done(r) = o {
            for t in &r.tables {
                written.push(write(dir.join(csv_file_name(&r.name, t)), &render_csv(t))?);
            }
        }
    }
    written.push(write(dir.join("summary.json"), &summary_json(outcomes))?);
    written.push(write(dir.join("summary.txt"), &summary_text(outcomes))?);
    Ok(written)
}
