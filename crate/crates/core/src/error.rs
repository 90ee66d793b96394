use thiserror::Error;

use crate::operator::Growth;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected:?}, got {actual:?}")]
    DimensionMismatch {
        context: &'static str,
        expected: (usize, usize),
        actual: (usize, usize),
    },

    #[error("{context} requires a square matrix, got {rows}x{cols}")]
    NotSquare {
        context: &'static str,
        rows: usize,
        cols: usize,
    },

    #[error("{context} requires a non-empty matrix")]
    Empty { context: &'static str },

    #[error("size {size} exceeds configured cap {cap} in {context}")]
    SizeCap {
        context: &'static str,
        size: usize,
        cap: usize,
    },

    #[error("norm estimate unconverged after {iterations} iterations (last estimate {last_estimate:e}, residual {residual:e})")]
    NormUnconverged {
        iterations: usize,
        last_estimate: f64,
        residual: f64,
    },

    #[error("matrix is numerically singular at pivot index {pivot_index}")]
    Singular { pivot_index: usize },

    #[error("matrix is not positive definite at index {index}")]
    NotPositiveDefinite { index: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("{what} is not a projection (idempotence residual {residual:e})")]
    NotProjection { what: &'static str, residual: f64 },

    #[error("Z does not solve X = TZ - ZV (residual {residual:e}, tolerance {tolerance:e})")]
    NotASolution { residual: f64, tolerance: f64 },

    #[error("partial sums diverge on the window ({growth:?})")]
    Diverging { growth: Growth, partial_norms: Vec<f64> },

    #[error("similarity certificate refused: conjugation residual {residual:e} exceeds {tolerance:e}")]
    CertificateRefused { residual: f64, tolerance: f64 },

    #[error("weighted shift is not power bounded on the window (sup beta(n+k)/beta(n) = {ratio:e}, cap {cap:e})")]
    NotPowerBounded { ratio: f64, cap: f64 },

    #[error("{what} is not a contraction (norm {norm})")]
    NotContraction { what: &'static str, norm: f64 },

    #[error("contraction check failed on sample {sample}: |R(X)v|^2 = {image:e} > |v|^2 = {value:e}")]
    ContractionViolated {
        sample: usize,
        image: f64,
        value: f64,
        witness: Vec<num_complex::Complex64>,
    },

    #[error("analytic envelope violated: {detail}")]
    EnvelopeViolated { detail: String },

    #[error("unknown gallery instance `{0}`")]
    UnknownInstance(String),
}
