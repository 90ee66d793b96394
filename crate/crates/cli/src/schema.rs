//! The spec document: named operators plus the jobs that analyse them.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use simlab::sylvester::{DecompositionCase, Side};

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

/// A matrix entry: a bare real or a `[re, im]` pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Real(f64),
    Complex([f64; 2]),
}

impl Entry {
    pub fn value(self) -> Complex64 {
        match self {
            Entry::Real(re) => Complex64::new(re, 0.0),
            Entry::Complex([re, im]) => Complex64::new(re, im),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecDocument {
    pub schema_version: u32,
    /// Base seed mixed into every random operator and sampling job.
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<ToleranceOverrides>,
    pub operators: BTreeMap<String, OperatorSpec>,
    pub jobs: Vec<AnalysisJob>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceOverrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solve_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub norm_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub identity_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_norm_iterations: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub size_cap: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum OperatorSpec {
    /// Row-major entries.
    Dense {
        rows: Vec<Vec<Entry>>,
    },
    Diagonal {
        entries: Vec<Entry>,
    },
    Identity {
        dim: usize,
    },
    Zero {
        rows: usize,
        cols: usize,
    },
    /// Unilateral shift of multiplicity `d` truncated to `n` blocks.
    Shift {
        d: usize,
        n: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        guard: Option<usize>,
    },
    WeightedShift {
        weights: Vec<f64>,
        d: usize,
        n: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        guard: Option<usize>,
    },
    /// Left inverse of a weighted shift.
    LeftInverse {
        of: String,
    },
    RandomMatrix {
        rows: usize,
        cols: usize,
        #[serde(default)]
        seed: u64,
    },
    RandomContraction {
        dim: usize,
        bound: f64,
        #[serde(default)]
        seed: u64,
    },
    RandomUnitary {
        dim: usize,
        #[serde(default)]
        seed: u64,
    },
    Adjoint {
        of: String,
    },
    Scaled {
        of: String,
        factor: Entry,
    },
    Sum {
        terms: Vec<String>,
    },
    Product {
        factors: Vec<String>,
    },
    /// `TZ - ZV`.
    Commutator {
        t: String,
        v: String,
        z: String,
    },
    /// `R(X) = [[T, X], [0, V]]`.
    BlockUpper {
        t: String,
        x: String,
        v: String,
    },
    DirectSum {
        terms: Vec<String>,
    },
    /// CAR-valued Hankel matrix `[a_{i+j} C_{i+j}]` on `blocks` blocks.
    CarHankel {
        alpha: Vec<Entry>,
        blocks: usize,
        modes: usize,
    },
}

impl OperatorSpec {
    /// Names of the operators this one is built from.
    pub fn references(&self) -> Vec<(&'static str, &str)> {
        match self {
            OperatorSpec::LeftInverse { of } | OperatorSpec::Adjoint { of } | OperatorSpec::Scaled { of, .. } => {
                vec![("of", of.as_str())]
            }
            OperatorSpec::Sum { terms } | OperatorSpec::DirectSum { terms } => {
                terms.iter().map(|t| ("terms", t.as_str())).collect()
            }
            OperatorSpec::Product { factors } => factors.iter().map(|t| ("factors", t.as_str())).collect(),
            OperatorSpec::Commutator { t, v, z } => vec![("t", t.as_str()), ("v", v.as_str()), ("z", z.as_str())],
            OperatorSpec::BlockUpper { t, x, v } => vec![("t", t.as_str()), ("x", x.as_str()), ("v", v.as_str())],
            _ => Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisJob {
    pub name: String,
    pub analysis: Analysis,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SylvesterMethod {
    Kronecker,
    PartialSum,
    Cesaro,
    Symmetric,
}

/// Coordinates `[start, start + len)` spanned by a projection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoordinateRange {
    pub start: usize,
    pub len: usize,
}

fn default_n_max() -> usize {
    32
}

fn default_gallery_n_max() -> usize {
    64
}

fn default_samples() -> usize {
    100
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Analysis {
    /// Structural predicates and the power profile of one operator.
    Diagnose {
        operator: String,
        #[serde(default = "default_n_max")]
        n_max: usize,
    },
    Sylvester {
        t: String,
        v: String,
        x: String,
        method: SylvesterMethod,
        #[serde(default = "default_n_max")]
        n_max: usize,
    },
    Growth {
        t: String,
        v: String,
        x: String,
        side: Side,
        #[serde(default = "default_n_max")]
        n_max: usize,
    },
    Decompose {
        case: DecompositionCase,
        t: String,
        v: String,
        x: String,
        /// A solution of `X = TZ - ZV`; when absent the plain partial sum
        /// at `n_max` is used.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        z: Option<String>,
        #[serde(default = "default_n_max")]
        n_max: usize,
    },
    /// Similarity certificate for a `block_upper` (or two-term
    /// `direct_sum`) operator.
    Certify {
        operator: String,
        /// When absent `Z` comes from the direct solver.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        z: Option<String>,
    },
    Nearness {
        t: String,
        c: String,
        /// Shift weights `w_0, w_1, ...`; `beta(n) = w_0 ... w_{n-1}`.
        /// Defaults to all ones.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        weights: Option<Vec<f64>>,
        n: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        projection: Option<CoordinateRange>,
    },
    Renorm {
        t: String,
        x: String,
        s: String,
        depth: usize,
        #[serde(default = "default_samples")]
        samples: usize,
    },
    Car {
        alpha: Vec<Entry>,
        blocks: usize,
        modes: usize,
    },
    Gallery {
        instance: String,
        #[serde(default = "default_gallery_n_max")]
        n_max: usize,
    },
}

impl Analysis {
    pub fn kind(&self) -> &'static str {
        match self {
            Analysis::Diagnose { .. } => "diagnose",
            Analysis::Sylvester { .. } => "sylvester",
            Analysis::Growth { .. } => "growth",
            Analysis::Decompose { .. } => "decompose",
            Analysis::Certify { .. } => "certify",
            Analysis::Nearness { .. } => "nearness",
            Analysis::Renorm { .. } => "renorm",
            Analysis::Car { .. } => "car",
            Analysis::Gallery { .. } => "gallery",
        }
    }

    /// `(field, operator name)` for every operator reference.
    pub fn references(&self) -> Vec<(&'static str, &str)> {
        match self {
            Analysis::Diagnose { operator, .. } => vec![("operator", operator.as_str())],
            Analysis::Sylvester { t, v, x, .. } | Analysis::Growth { t, v, x, .. } => {
                vec![("t", t.as_str()), ("v", v.as_str()), ("x", x.as_str())]
            }
            Analysis::Decompose { t, v, x, z, .. } => {
                let mut r = vec![("t", t.as_str()), ("v", v.as_str()), ("x", x.as_str())];
                if let Some(z) = z {
                    r.push(("z", z.as_str()));
                }
                r
            }
            Analysis::Certify { operator, z } => {
                let mut r = vec![("operator", operator.as_str())];
                if let Some(z) = z {
                    r.push(("z", z.as_str()));
                }
                r
            }
            Analysis::Nearness { t, c, .. } => vec![("t", t.as_str()), ("c", c.as_str())],
            Analysis::Renorm { t, x, s, .. } => vec![("t", t.as_str()), ("x", x.as_str()), ("s", s.as_str())],
            Analysis::Car { .. } | Analysis::Gallery { .. } => Vec::new(),
        }
    }
}

impl SpecDocument {
    /// Parses a document; syntax and schema errors carry line and column.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| {
            let full = e.to_string();
            let suffix = format!(" at line {} column {}", e.line(), e.column());
            CliError::Parse {
                line: e.line(),
                column: e.column(),
                message: full.strip_suffix(&suffix).unwrap_or(&full).to_string(),
            }
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec documents always serialize")
    }

    pub fn job(&self, name: &str) -> Option<&AnalysisJob> {
        self.jobs.iter().find(|j| j.name == name)
    }
}
