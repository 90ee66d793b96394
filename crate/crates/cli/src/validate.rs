//! Static checks of a spec document: schema, shapes and guard windows.

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;
use simlab::car::HankelSpec;
use simlab::operator::shift_weights;
use simlab::perturbation::GALLERY_NAMES;
use simlab::sylvester::DecompositionCase;
use simlab::ToleranceConfig;

use crate::error::CliError;
use crate::resolve::{Resolved, Resolver};
use crate::schema::{Analysis, SpecDocument, SylvesterMethod, ToleranceOverrides, SCHEMA_VERSION};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub path: String,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{s}: {}: {}", self.path, self.message)
    }
}

/// Tolerances from the defaults, the document, then the command line.
pub fn effective_config(overrides: Option<&ToleranceOverrides>, tol: Option<f64>) -> ToleranceConfig {
    let mut cfg = ToleranceConfig::default();
    if let Some(o) = overrides {
        if let Some(v) = o.solve_tol {
            cfg.solve_tol = v;
        }
        if let Some(v) = o.norm_tol {
            cfg.norm_tol = v;
        }
        if let Some(v) = o.identity_tol {
            cfg.identity_tol = v;
        }
        if let Some(v) = o.max_norm_iterations {
            cfg.max_norm_iterations = v;
        }
        if let Some(v) = o.size_cap {
            cfg.size_cap = v;
        }
    }
    if let Some(t) = tol {
        cfg.identity_tol = t;
    }
    cfg
}

struct Collector {
    out: Vec<Diagnostic>,
    seen: BTreeSet<(String, String)>,
}

impl Collector {
    fn push(&mut self, severity: Severity, path: impl Into<String>, message: impl Into<String>) {
        let (path, message) = (path.into(), message.into());
        if self.seen.insert((path.clone(), message.clone())) {
            self.out.push(Diagnostic {
                severity,
                path,
                message,
            });
        }
    }

    fn error(&mut self, path: impl Into<String>, message: impl Into<String>) {
        self.push(Severity::Error, path, message);
    }

    fn warn(&mut self, path: impl Into<String>, message: impl Into<String>) {
        self.push(Severity::Warning, path, message);
    }

    fn record_cli_error(&mut self, e: CliError) {
        match e {
            CliError::Spec { path, message } => self.error(path, message),
            CliError::Unresolved { path, name } => self.error(path, format!("unresolved operator reference `{name}`")),
            other => self.error("", other.to_string()),
        }
    }
}

fn shape(m: &Resolved) -> String {
    format!("{}x{}", m.matrix.rows(), m.matrix.cols())
}

fn guard_warning(c: &mut Collector, path: &str, n_max: usize, name: &str, op: &Resolved) {
    if let Some(g) = op.guard() {
        if n_max > g {
            c.warn(
                path,
                format!(
                    "n_max {n_max} exceeds the guard {g} of `{name}`: beyond the guard window truncated powers no longer coincide with the untruncated operator (window-exactness contract)"
                ),
            );
        }
    }
}

fn require_square(c: &mut Collector, path: String, name: &str, op: &Resolved) -> bool {
    if op.matrix.is_square() {
        true
    } else {
        c.error(path, format!("`{name}` must be square, got {}", shape(op)));
        false
    }
}

fn check_triple(c: &mut Collector, base: &str, names: [&str; 3], ops: [&Resolved; 3]) -> bool {
    let [tn, vn, xn] = names;
    let [t, v, x] = ops;
    let ok_t = require_square(c, format!("{base}.t"), tn, t);
    let ok_v = require_square(c, format!("{base}.v"), vn, v);
    if !(ok_t && ok_v) {
        return false;
    }
    let expected = (t.matrix.rows(), v.matrix.rows());
    if x.matrix.shape() != expected {
        c.error(
            format!("{base}.x"),
            format!(
                "mismatched block dims: `{xn}` is {}, expected {}x{} from `{tn}` ({}) and `{vn}` ({})",
                shape(x),
                expected.0,
                expected.1,
                shape(t),
                shape(v)
            ),
        );
        return false;
    }
    true
}

/// Checks a document without running any analysis.
pub fn validate(doc: &SpecDocument, seed: Option<u64>, tol: Option<f64>) -> Vec<Diagnostic> {
    let mut c = Collector {
        out: Vec::new(),
        seen: BTreeSet::new(),
    };
    if doc.schema_version != SCHEMA_VERSION {
        c.error(
            "schema_version",
            format!(
                "unsupported schema version {} (expected {SCHEMA_VERSION})",
                doc.schema_version
            ),
        );
        return c.out;
    }
    let cfg = effective_config(doc.tolerances.as_ref(), tol);
    if let Err(e) = cfg.validate() {
        c.error("tolerances", e.to_string());
        return c.out;
    }
    let mut resolver = Resolver::new(doc, seed.unwrap_or(doc.seed), cfg);
    for name in doc.operators.keys() {
        if let Err(e) = resolver.resolve(name) {
            c.record_cli_error(e);
        }
    }

    let mut names = BTreeSet::new();
    for (i, job) in doc.jobs.iter().enumerate() {
        let base = format!("jobs[{i}]");
        if job.name.is_empty() || job.name.contains(['/', '\\']) || job.name.starts_with('.') {
            c.error(
                format!("{base}.name"),
                format!("`{}` is not usable as a file name", job.name),
            );
        }
        if !names.insert(job.name.as_str()) {
            c.error(format!("{base}.name"), format!("duplicate job name `{}`", job.name));
        }
        let abase = format!("{base}.analysis");
        let mut ops = Vec::new();
        let mut missing = false;
        for (field, r) in job.analysis.references() {
            if !doc.operators.contains_key(r) {
                c.error(
                    format!("{abase}.{field}"),
                    format!("unresolved operator reference `{r}`"),
                );
                missing = true;
                continue;
            }
            match resolver.resolve(r) {
                Ok(op) => ops.push(op),
                Err(_) => missing = true,
            }
        }
        if missing {
            continue;
        }
        check_job(&mut c, &abase, &job.analysis, &ops, &cfg);
    }
    c.out
}

fn check_job(c: &mut Collector, base: &str, analysis: &Analysis, ops: &[Resolved], cfg: &ToleranceConfig) {
    match analysis {
        Analysis::Diagnose { operator, n_max } => {
            if require_square(c, format!("{base}.operator"), operator, &ops[0]) {
                guard_warning(c, &format!("{base}.n_max"), *n_max, operator, &ops[0]);
            }
        }
        Analysis::Sylvester { t, v, x, method, n_max } => {
            if check_triple(c, base, [t, v, x], [&ops[0], &ops[1], &ops[2]]) && *method != SylvesterMethod::Kronecker {
                guard_warning(c, &format!("{base}.n_max"), *n_max, v, &ops[1]);
                guard_warning(c, &format!("{base}.n_max"), *n_max, t, &ops[0]);
            }
        }
        Analysis::Growth { t, v, x, n_max, .. } => {
            if check_triple(c, base, [t, v, x], [&ops[0], &ops[1], &ops[2]]) {
                guard_warning(c, &format!("{base}.n_max"), *n_max, v, &ops[1]);
                guard_warning(c, &format!("{base}.n_max"), *n_max, t, &ops[0]);
            }
        }
        Analysis::Decompose {
            case,
            t,
            v,
            x,
            z,
            n_max,
        } => {
            if !check_triple(c, base, [t, v, x], [&ops[0], &ops[1], &ops[2]]) {
                return;
            }
            match z {
                Some(zn) if ops[3].matrix.shape() != ops[2].matrix.shape() => c.error(
                    format!("{base}.z"),
                    format!(
                        "mismatched block dims: `{zn}` is {}, `{x}` is {}",
                        shape(&ops[3]),
                        shape(&ops[2])
                    ),
                ),
                Some(_) => {}
                None => guard_warning(c, &format!("{base}.n_max"), *n_max, v, &ops[1]),
            }
            if *case == DecompositionCase::Weighted {
                let is_shift = ops[1]
                    .windowed
                    .as_ref()
                    .map(|w| shift_weights(w).is_ok())
                    .unwrap_or(false);
                if !is_shift {
                    c.error(
                        format!("{base}.v"),
                        format!("weighted case needs `{v}` to be a weighted shift"),
                    );
                }
            }
        }
        Analysis::Certify { operator, z } => {
            let Some(b) = &ops[0].block else {
                c.error(
                    format!("{base}.operator"),
                    format!("`{operator}` must be a block_upper or a two-term direct_sum"),
                );
                return;
            };
            if let Some(zn) = z {
                let expected = (b.k_dim(), b.h_dim());
                if ops[1].matrix.shape() != expected {
                    c.error(
                        format!("{base}.z"),
                        format!(
                            "mismatched block dims: `{zn}` is {}, expected {}x{} from `{operator}` ({})",
                            shape(&ops[1]),
                            expected.0,
                            expected.1,
                            shape(&ops[0])
                        ),
                    );
                }
            }
        }
        Analysis::Nearness {
            t,
            c: cn,
            weights,
            n,
            projection,
        } => {
            let ok_t = require_square(c, format!("{base}.t"), t, &ops[0]);
            let ok_c = require_square(c, format!("{base}.c"), cn, &ops[1]);
            if ok_t && ok_c && ops[0].matrix.shape() != ops[1].matrix.shape() {
                c.error(
                    format!("{base}.c"),
                    format!(
                        "mismatched dims: `{t}` is {}, `{cn}` is {}",
                        shape(&ops[0]),
                        shape(&ops[1])
                    ),
                );
            }
            if *n == 0 {
                c.error(format!("{base}.n"), "n must be at least 1");
            }
            if let Some(w) = weights {
                if w.len() < *n {
                    c.error(
                        format!("{base}.weights"),
                        format!("{} weights cannot cover n = {n}", w.len()),
                    );
                }
                if let Some(i) = w.iter().position(|x| !(*x > 0.0 && x.is_finite())) {
                    c.error(format!("{base}.weights[{i}]"), "weights must be positive and finite");
                }
            }
            if let Some(p) = projection {
                if p.len == 0 || p.start + p.len > ops[0].matrix.rows() {
                    c.error(
                        format!("{base}.projection"),
                        format!(
                            "range [{}, {}) does not fit dimension {}",
                            p.start,
                            p.start + p.len,
                            ops[0].matrix.rows()
                        ),
                    );
                }
            }
            guard_warning(c, &format!("{base}.n"), *n, t, &ops[0]);
        }
        Analysis::Renorm {
            t,
            x,
            s,
            depth: _,
            samples,
        } => {
            let ok_t = require_square(c, format!("{base}.t"), t, &ops[0]);
            let is_shift = ops[2]
                .windowed
                .as_ref()
                .map(|w| shift_weights(w).is_ok())
                .unwrap_or(false);
            if !is_shift {
                c.error(format!("{base}.s"), format!("`{s}` must be a weighted shift"));
            } else if ok_t && ops[1].matrix.shape() != (ops[0].matrix.rows(), ops[2].matrix.rows()) {
                c.error(
                    format!("{base}.x"),
                    format!(
                        "mismatched block dims: `{x}` is {}, expected {}x{}",
                        shape(&ops[1]),
                        ops[0].matrix.rows(),
                        ops[2].matrix.rows()
                    ),
                );
            }
            if *samples == 0 {
                c.error(format!("{base}.samples"), "samples must be positive");
            }
        }
        Analysis::Car { alpha, blocks, modes } => {
            let a = alpha.iter().map(|e| e.value()).collect();
            if let Err(e) = HankelSpec::new(a, *blocks, *modes) {
                c.error(base.to_string(), e.to_string());
            }
            let _ = cfg;
        }
        Analysis::Gallery { instance, .. } => {
            if !GALLERY_NAMES.contains(&instance.as_str()) {
                c.error(
                    format!("{base}.instance"),
                    format!(
                        "unknown gallery instance `{instance}` (known: {})",
                        GALLERY_NAMES.join(", ")
                    ),
                );
            }
        }
    }
}

pub fn has_errors(d: &[Diagnostic]) -> bool {
    d.iter().any(|d| d.severity == Severity::Error)
}
