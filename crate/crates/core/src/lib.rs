//! Finite-window laboratory for block operators `R(X) = [[T, X], [0, V]]`.
//!
//! The crate builds truncated shift-type operators, solves and diagnoses the
//! commutator equation `X = TZ - ZV`, evaluates growth conditions and
//! quadratic nearness, checks zero-product perturbation identities, realizes
//! the hilbertian renorming that makes `R(X)` a contraction, and constructs
//! CAR-valued Foguel-Hankel operators. Every identity is checked on an index
//! window where the truncation is exact.

pub mod car;
pub mod error;
pub mod linalg;
pub mod nearness;
pub mod operator;
pub mod perturbation;
pub mod sylvester;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, ToleranceConfig};
pub use num_complex::Complex64;
