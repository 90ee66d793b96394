//! CAR generators, CAR-valued Hankel matrices `Gamma_a = [a_{i+j} C_{i+j}]`
//! and the Foguel-Hankel operators `[[S^*, Gamma_a], [0, S]]`.
//!
//! Generators use the Jordan-Wigner form
//! `C_j = Z^{(x) j} (x) sigma (x) I^{(x)(m-j-1)}`, `sigma = [[0, 1], [0, 0]]`,
//! `Z = diag(1, -1)`, so every entry is 0 or +-1.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{kron, operator_norm, ComplexMatrix, ToleranceConfig, ONE};
use crate::nearness::{near_row, NearnessCurve};
use crate::operator::{truncated_shift, BetaSequence, BlockUpper};

/// Largest supported mode count (dimension 256).
pub const MODE_CAP: usize = 8;

#[derive(Debug, Clone)]
pub struct CarAlgebra {
    modes: usize,
    generators: Vec<ComplexMatrix>,
}

pub fn car_generators(modes: usize) -> Result<CarAlgebra> {
    if modes == 0 || modes > MODE_CAP {
        return Err(Error::InvalidParameter {
            name: "modes",
            reason: format!("need 1 <= modes <= {MODE_CAP}, got {modes}"),
        });
    }
    let cap = 1usize << MODE_CAP;
    let sigma = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]);
    let parity = ComplexMatrix::diag_real(&[1.0, -1.0]);
    let id2 = ComplexMatrix::identity(2);
    let mut generators = Vec::with_capacity(modes);
    for j in 0..modes {
        let mut g = ComplexMatrix::identity(1);
        for site in 0..modes {
            let factor = match site.cmp(&j) {
                std::cmp::Ordering::Less => &parity,
                std::cmp::Ordering::Equal => &sigma,
                std::cmp::Ordering::Greater => &id2,
            };
            g = kron(&g, factor, cap)?;
        }
        generators.push(g);
    }
    Ok(CarAlgebra { modes, generators })
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct CarResiduals {
    /// `max ||C_i C_j + C_j C_i||`.
    pub anticommutator: f64,
    /// `max ||C_i C_j^* + C_j^* C_i - delta_ij I||`.
    pub mixed: f64,
}

impl CarAlgebra {
    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn dim(&self) -> usize {
        1 << self.modes
    }

    pub fn generator(&self, j: usize) -> &ComplexMatrix {
        &self.generators[j]
    }

    pub fn generators(&self) -> &[ComplexMatrix] {
        &self.generators
    }

    /// Largest entrywise deviation from both CAR relations over all pairs.
    pub fn relation_residuals(&self) -> CarResiduals {
        let id = ComplexMatrix::identity(self.dim());
        let mut out = CarResiduals {
            anticommutator: 0.0,
            mixed: 0.0,
        };
        for (i, ci) in self.generators.iter().enumerate() {
            for (j, cj) in self.generators.iter().enumerate() {
                let anti = &ci.matmul(cj) + &cj.matmul(ci);
                out.anticommutator = out.anticommutator.max(anti.max_abs());
                let cja = cj.adjoint();
                let mut mixed = &ci.matmul(&cja) + &cja.matmul(ci);
                if i == j {
                    mixed = &mixed - &id;
                }
                out.mixed = out.mixed.max(mixed.max_abs());
            }
        }
        out
    }
}

/// Finitely supported `alpha` on a window of `blocks` blocks with `modes`
/// CAR modes. The support must fit in the window (`alpha.len() <= blocks`)
/// so that every truncated identity is exact, and `modes >= alpha.len()`
/// so each needed generator exists.
#[derive(Debug, Clone, PartialEq)]
pub struct HankelSpec {
    alpha: Vec<Complex64>,
    blocks: usize,
    modes: usize,
}

impl HankelSpec {
    pub fn new(alpha: Vec<Complex64>, blocks: usize, modes: usize) -> Result<Self> {
        if blocks < 2 {
            return Err(Error::InvalidParameter {
                name: "blocks",
                reason: format!("need at least 2 blocks, got {blocks}"),
            });
        }
        if alpha.len() > blocks {
            return Err(Error::InvalidParameter {
                name: "alpha",
                reason: format!("support {} does not fit in {blocks} blocks", alpha.len()),
            });
        }
        if modes == 0 || modes > MODE_CAP || modes < alpha.len() {
            return Err(Error::InvalidParameter {
                name: "modes",
                reason: format!("need {} <= modes <= {MODE_CAP}, got {modes}", alpha.len().max(1)),
            });
        }
        let cap = ToleranceConfig::default().size_cap;
        let size = 2 * blocks * (1usize << modes);
        if size > cap {
            return Err(Error::SizeCap {
                context: "foguel-hankel window",
                size,
                cap,
            });
        }
        Ok(Self { alpha, blocks, modes })
    }

    pub fn alpha(&self) -> &[Complex64] {
        &self.alpha
    }

    pub fn blocks(&self) -> usize {
        self.blocks
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn block_dim(&self) -> usize {
        1 << self.modes
    }

    fn coefficient(&self, k: usize) -> Complex64 {
        self.alpha.get(k).copied().unwrap_or_default()
    }
}

/// `[w(i, j) a_{i+j} C_{i+j}]` over the window.
fn weighted_hankel_matrix(spec: &HankelSpec, alg: &CarAlgebra, weight: impl Fn(usize, usize) -> f64) -> ComplexMatrix {
    let b = spec.block_dim();
    let n = spec.blocks;
    let mut g = ComplexMatrix::zeros(b * n, b * n);
    for i in 0..n {
        for j in 0..n {
            let a = spec.coefficient(i + j);
            if a == Complex64::default() {
                continue;
            }
            let block = alg.generator(i + j).scale(a * weight(i, j));
            g.set_block(i * b, j * b, &block);
        }
    }
    g
}

pub fn hankel_gamma(spec: &HankelSpec) -> Result<ComplexMatrix> {
    let alg = car_generators(spec.modes)?;
    Ok(weighted_hankel_matrix(spec, &alg, |_, _| 1.0))
}

/// `[(j + 1) a_{i+j} C_{i+j}]`.
pub fn weighted_hankel(spec: &HankelSpec) -> Result<ComplexMatrix> {
    let alg = car_generators(spec.modes)?;
    Ok(weighted_hankel_matrix(spec, &alg, |_, j| (j + 1) as f64))
}

/// `sup_k (k+1)^2 sum_{i>=k} |a_i|^2`.
pub fn a_alpha(alpha: &[Complex64]) -> f64 {
    let mut tail = 0.0;
    let mut best = 0.0f64;
    for k in (0..alpha.len()).rev() {
        tail += alpha[k].norm_sqr();
        best = best.max(((k + 1) * (k + 1)) as f64 * tail);
    }
    best
}

/// `sum_k (k+1)^2 |a_k|^2`.
pub fn b_alpha(alpha: &[Complex64]) -> f64 {
    alpha
        .iter()
        .enumerate()
        .map(|(k, a)| ((k + 1) * (k + 1)) as f64 * a.norm_sqr())
        .sum()
}

/// `R(Gamma_a) = [[S^*, Gamma_a], [0, S]]` with shift multiplicity `2^modes`.
pub fn foguel_hankel(spec: &HankelSpec) -> Result<BlockUpper> {
    let s = truncated_shift(spec.block_dim(), spec.blocks)?;
    BlockUpper::new(s.adjoint(), hankel_gamma(spec)?, s)
}

/// `[[S^*, P], [0, S]]` for a diagonal 0/1 projection `P` on `l^2` with
/// scalar blocks; `pattern[n]` selects coordinate `n`.
pub fn foguel_projection_operator(pattern: &[bool]) -> Result<BlockUpper> {
    let s = truncated_shift(1, pattern.len())?;
    let p = ComplexMatrix::diag_real(&pattern.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect::<Vec<_>>());
    BlockUpper::new(s.adjoint(), p, s)
}

/// `||S^* Gamma - Gamma S||` over the window.
pub fn intertwining_residual(spec: &HankelSpec, cfg: &ToleranceConfig) -> Result<f64> {
    let s = truncated_shift(spec.block_dim(), spec.blocks)?;
    let g = hankel_gamma(spec)?;
    operator_norm(&(&s.matrix().adjoint().matmul(&g) - &g.matmul(s.matrix())), cfg)
}

/// `||Gamma_n - n Gamma S^{n-1}||` for `n = 1..=n_max`, with
/// `Gamma_n = sum_{j<n} S^{*j} Gamma S^{n-j-1}`.
pub fn gamma_n_identity_check(spec: &HankelSpec, n_max: usize, cfg: &ToleranceConfig) -> Result<Vec<f64>> {
    if n_max >= spec.blocks {
        return Err(Error::InvalidParameter {
            name: "n_max",
            reason: format!("n_max {n_max} exceeds the guard {}", spec.blocks - 1),
        });
    }
    let s = truncated_shift(spec.block_dim(), spec.blocks)?;
    let s = s.matrix();
    let sa = s.adjoint();
    let g = hankel_gamma(spec)?;
    let spow = s.powers(n_max);
    let sapow = sa.powers(n_max);
    let mut out = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let mut gn = ComplexMatrix::zeros(g.rows(), g.cols());
        for j in 0..n {
            gn = &gn + &sapow[j].matmul(&g).matmul(&spow[n - j - 1]);
        }
        let rhs = g.matmul(&spow[n - 1]).scale_real(n as f64);
        out.push(operator_norm(&(&gn - &rhs), cfg)?);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct HankelBound {
    pub norm: f64,
    /// `B(a)^{1/2}`.
    pub bound: f64,
    pub holds: bool,
}

pub fn weighted_hankel_bound_check(spec: &HankelSpec, cfg: &ToleranceConfig) -> Result<HankelBound> {
    let norm = operator_norm(&weighted_hankel(spec)?, cfg)?;
    let bound = b_alpha(&spec.alpha).sqrt();
    Ok(HankelBound {
        norm,
        bound,
        holds: norm <= bound + cfg.norm_tol.max(bound * cfg.norm_tol),
    })
}

/// Row-form nearness of `R(Gamma_a)` to `R(0)` modulo the first block of
/// the second summand, over `n = 1..=blocks`.
pub fn foguel_nearness(spec: &HankelSpec, cfg: &ToleranceConfig) -> Result<NearnessCurve> {
    let b = foguel_hankel(spec)?;
    let r = b.assemble();
    let r0 = b.diagonal_part();
    let k = b.k_dim();
    let mut p0 = ComplexMatrix::zeros(r.rows(), r.rows());
    for i in 0..spec.block_dim() {
        p0[(k + i, k + i)] = ONE;
    }
    let beta = BetaSequence::ones(spec.blocks + 1);
    near_row(&r, &r0, &beta, spec.blocks, Some(&p0), cfg)
}
