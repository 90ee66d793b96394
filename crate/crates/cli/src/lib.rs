//! Batch front end for `simlab`: spec documents naming operators and the
//! analyses to run on them, with CSV and JSON reports.

pub mod error;
pub mod report;
pub mod resolve;
pub mod run;
pub mod schema;
pub mod validate;

use crate::error::CliError;
use crate::report::JobOutcome;
use crate::resolve::Resolver;
use crate::schema::SpecDocument;
use crate::validate::{effective_config, has_errors, validate, Diagnostic};

pub struct RunOutcome {
    pub warnings: Vec<Diagnostic>,
    pub jobs: Vec<JobOutcome>,
}

impl RunOutcome {
    pub fn failed(&self) -> bool {
        self.jobs.iter().any(JobOutcome::is_failure)
    }
}

/// Validates `doc`, then runs either the named job or all of them in order.
///
/// Spec errors abort before any analysis; analysis failures are recorded per
/// job and the remaining jobs still run.
pub fn execute(
    doc: &SpecDocument,
    job: Option<&str>,
    seed: Option<u64>,
    tol: Option<f64>,
) -> Result<RunOutcome, CliError> {
    let diagnostics = validate(doc, seed, tol);
    if has_errors(&diagnostics) {
        return Err(CliError::Invalid(diagnostics));
    }
    let selected: Vec<_> = match job {
        Some(name) => vec![doc.job(name).ok_or_else(|| CliError::UnknownJob(name.to_string()))?],
        None => doc.jobs.iter().collect(),
    };
    let cfg = effective_config(doc.tolerances.as_ref(), tol);
    let seed = seed.unwrap_or(doc.seed);
    let mut resolver = Resolver::new(doc, seed, cfg);
    let mut jobs = Vec::with_capacity(selected.len());
    for j in selected {
        jobs.push(match run::run_job(j, &mut resolver, &cfg, seed) {
            Ok(r) => JobOutcome::Done(r),
            Err(e) => JobOutcome::Failed {
                name: j.name.clone(),
                kind: j.analysis.kind(),
                error: e.to_string(),
            },
        });
    }
    Ok(RunOutcome {
        warnings: diagnostics,
        jobs,
    })
}
