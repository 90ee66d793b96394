use thiserror::Error;

use crate::validate::Diagnostic;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{path}: {message}")]
    Spec { path: String, message: String },
    #[error("{path}: unresolved operator reference `{name}`")]
    Unresolved { path: String, name: String },
    #[error("no job named `{0}`")]
    UnknownJob(String),
    #[error("spec has {} error(s):\n{}", .0.len(), render(.0))]
    Invalid(Vec<Diagnostic>),
    #[error("job `{job}` failed: {source}")]
    Analysis {
        job: String,
        #[source]
        source: simlab::Error,
    },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

fn render(d: &[Diagnostic]) -> String {
    d.iter().map(|d| format!("  {d}")).collect::<Vec<_>>().join("\n")
}
