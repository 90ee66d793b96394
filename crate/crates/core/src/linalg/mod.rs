//! Dense complex kernels shared by every analysis: products, norms,
//! factorizations and the minimum-norm constrained solve.

mod matrix;
mod norm;
pub mod random;
mod solve;

pub use matrix::{inner, kron, vector_norm, ComplexMatrix, ONE, ZERO};
pub use norm::{operator_norm, spectral_radius, RadiusVerdict, SpectralRadius};
pub use solve::{
    lstsq, lu_solve, min_norm_constrained, Cholesky, LeastSquares, LuFactors, LuSolution, MinNormSolution,
};

use crate::error::{Error, Result};

/// Numerical tolerances threaded through every operation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToleranceConfig {
    /// Relative residual bound for linear solves; `1 / solve_tol` is the
    /// condition number past which a system is declared singular.
    pub solve_tol: f64,
    /// Relative convergence bound for iterative norm estimates.
    pub norm_tol: f64,
    /// Absolute bound for exact-identity checks, scaled by the matrix norm.
    pub identity_tol: f64,
    /// Iteration cap for a single Krylov norm estimate.
    pub max_norm_iterations: usize,
    /// Largest admissible dimension for Kronecker-produced systems.
    pub size_cap: usize,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self {
            solve_tol: 1e-10,
            norm_tol: 1e-12,
            identity_tol: 1e-10,
            max_norm_iterations: 600,
            size_cap: 4096,
        }
    }
}

impl ToleranceConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("solve_tol", self.solve_tol),
            ("norm_tol", self.norm_tol),
            ("identity_tol", self.identity_tol),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("tolerance must be strictly positive, got {v}"),
                });
            }
        }
        if self.max_norm_iterations == 0 || self.size_cap == 0 {
            return Err(Error::InvalidParameter {
                name: "caps",
                reason: "iteration and size caps must be positive".into(),
            });
        }
        Ok(())
    }

    /// Identity tolerance scaled by a reference magnitude (never below 1).
    pub fn scaled_identity_tol(&self, scale: f64) -> f64 {
        self.identity_tol * scale.max(1.0)
    }
}
