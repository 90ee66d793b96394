//! Finite windows of shift-type operators and the block operator `R(X)`.
//!
//! A truncated operator on `l^2(H)` keeps `N` blocks of dimension `d` and
//! cuts everything past block `N - 1`. The `guard` of an operator counts the
//! shift steps that can be applied to vectors supported at the front of the
//! window before the cutoff is felt; identities are checked only there.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{operator_norm, ComplexMatrix, ToleranceConfig, ONE};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ambient {
    /// A plain finite-dimensional space.
    Finite { dim: usize },
    /// The first `blocks` blocks of `l^2(C^block)`.
    Truncated { block: usize, blocks: usize },
}

impl Ambient {
    pub fn dim(&self) -> usize {
        match *self {
            Ambient::Finite { dim } => dim,
            Ambient::Truncated { block, blocks } => block * blocks,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Window {
    pub ambient: Ambient,
    /// Safely applicable shift steps; always 0 for finite ambients.
    pub guard: usize,
}

impl Window {
    pub fn finite(dim: usize) -> Self {
        Self {
            ambient: Ambient::Finite { dim },
            guard: 0,
        }
    }

    /// Number of leading coordinates on which on-window predicates are tested.
    pub fn window_dim(&self) -> usize {
        match self.ambient {
            Ambient::Finite { dim } => dim,
            Ambient::Truncated { block, .. } => block * self.guard,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WindowedOperator {
    matrix: ComplexMatrix,
    window: Window,
}

fn size_check(context: &'static str, size: usize) -> Result<()> {
    let cap = ToleranceConfig::default().size_cap;
    if size > cap {
        return Err(Error::SizeCap { context, size, cap });
    }
    Ok(())
}

impl WindowedOperator {
    pub fn finite(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::NotSquare {
                context: "WindowedOperator",
                rows: matrix.rows(),
                cols: matrix.cols(),
            });
        }
        let window = Window::finite(matrix.rows());
        Ok(Self { matrix, window })
    }

    pub fn truncated(matrix: ComplexMatrix, block: usize, blocks: usize, guard: usize) -> Result<Self> {
        if matrix.rows() != block * blocks || matrix.cols() != block * blocks {
            return Err(Error::DimensionMismatch {
                context: "truncated operator",
                expected: (block * blocks, block * blocks),
                actual: matrix.shape(),
            });
        }
        if guard > blocks {
            return Err(Error::InvalidParameter {
                name: "guard",
                reason: format!("guard {guard} exceeds block count {blocks}"),
            });
        }
        Ok(Self {
            matrix,
            window: Window {
                ambient: Ambient::Truncated { block, blocks },
                guard,
            },
        })
    }

    pub fn with_window(matrix: ComplexMatrix, window: Window) -> Result<Self> {
        match window.ambient {
            Ambient::Finite { dim } => {
                let op = Self::finite(matrix)?;
                if op.dim() != dim {
                    return Err(Error::DimensionMismatch {
                        context: "finite operator",
                        expected: (dim, dim),
                        actual: op.matrix.shape(),
                    });
                }
                Ok(op)
            }
            Ambient::Truncated { block, blocks } => Self::truncated(matrix, block, blocks, window.guard),
        }
    }

    /// Narrows the guard, e.g. to reserve blocks for longer words.
    pub fn with_guard(mut self, guard: usize) -> Result<Self> {
        match self.window.ambient {
            Ambient::Truncated { blocks, .. } if guard <= blocks => {
                self.window.guard = guard;
                Ok(self)
            }
            Ambient::Truncated { blocks, .. } => Err(Error::InvalidParameter {
                name: "guard",
                reason: format!("guard {guard} exceeds block count {blocks}"),
            }),
            Ambient::Finite { .. } => Err(Error::InvalidParameter {
                name: "guard",
                reason: "finite operators carry no guard".into(),
            }),
        }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn ambient(&self) -> Ambient {
        self.window.ambient
    }

    pub fn guard(&self) -> usize {
        self.window.guard
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn adjoint(&self) -> Self {
        Self {
            matrix: self.matrix.adjoint(),
            window: self.window,
        }
    }
}

/// Block shift `e_{n,j} -> e_{n+1,j}` on `blocks` blocks of size `block`.
pub fn truncated_shift(block: usize, blocks: usize) -> Result<WindowedOperator> {
    if block == 0 || blocks < 2 {
        return Err(Error::InvalidParameter {
            name: "truncated_shift",
            reason: format!("need block >= 1 and blocks >= 2, got {block} and {blocks}"),
        });
    }
    size_check("truncated_shift", block * blocks)?;
    let n = block * blocks;
    let mut m = ComplexMatrix::zeros(n, n);
    for i in block..n {
        m[(i, i - block)] = ONE;
    }
    WindowedOperator::truncated(m, block, blocks, blocks - 1)
}

/// Weights `w_k > 0` and products `beta(n) = w_0 ... w_{n-1}`, `beta(0) = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct BetaSequence {
    weights: Vec<f64>,
    products: Vec<f64>,
}

impl BetaSequence {
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        if let Some((k, w)) = weights.iter().enumerate().find(|(_, w)| !(**w > 0.0 && w.is_finite())) {
            return Err(Error::InvalidParameter {
                name: "weights",
                reason: format!("weight {k} must be positive and finite, got {w}"),
            });
        }
        let mut products = Vec::with_capacity(weights.len() + 1);
        products.push(1.0);
        for w in &weights {
            let last = *products.last().unwrap();
            products.push(last * w);
        }
        Ok(Self { weights, products })
    }

    /// `beta = 1` on `len` indices.
    pub fn ones(len: usize) -> Self {
        Self::from_weights(vec![1.0; len.saturating_sub(1)]).expect("unit weights are valid")
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn products(&self) -> &[f64] {
        &self.products
    }

    /// Number of available `beta(n)` values.
    pub fn len(&self) -> usize {
        self.products.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn beta(&self, n: usize) -> f64 {
        self.products[n]
    }

    /// `sup beta(n + k) / beta(n)` over the available indices.
    pub fn sup_ratio(&self) -> f64 {
        let mut best = 1.0f64;
        for n in 0..self.products.len() {
            // beta(n + k) / beta(n) is maximized by the largest later product.
            let later = self.products[n..].iter().fold(0.0f64, |m, &b| m.max(b));
            best = best.max(later / self.products[n]);
        }
        best
    }
}

/// `S_w e_{n,j} = w_n e_{n+1,j}` on `blocks` blocks of size `block`.
pub fn weighted_shift(beta: &BetaSequence, block: usize, blocks: usize) -> Result<WindowedOperator> {
    if beta.weights().len() + 1 < blocks {
        return Err(Error::InvalidParameter {
            name: "weights",
            reason: format!(
                "{} weights cannot fill {blocks} blocks (need {})",
                beta.weights().len(),
                blocks.saturating_sub(1)
            ),
        });
    }
    let mut op = truncated_shift(block, blocks)?;
    let m = &mut op.matrix;
    for n in 0..blocks - 1 {
        let w = Complex64::new(beta.weights()[n], 0.0);
        for j in 0..block {
            m[((n + 1) * block + j, n * block + j)] = w;
        }
    }
    Ok(op)
}

/// Reads the weights back off the block subdiagonal of a weighted shift.
pub fn shift_weights(shift: &WindowedOperator) -> Result<Vec<f64>> {
    let Ambient::Truncated { block, blocks } = shift.ambient() else {
        return Err(Error::InvalidParameter {
            name: "shift",
            reason: "weighted shifts live on a truncated l^2 window".into(),
        });
    };
    let m = shift.matrix();
    let mut weights = Vec::with_capacity(blocks - 1);
    for n in 0..blocks.saturating_sub(1) {
        let w = m[((n + 1) * block, n * block)];
        if !(w.re > 0.0 && w.im == 0.0) {
            return Err(Error::InvalidParameter {
                name: "shift",
                reason: format!("block ({}, {n}) is not a positive multiple of the identity", n + 1),
            });
        }
        weights.push(w.re);
    }
    Ok(weights)
}

/// `L(y_0, y_1, ...) = (y_1 / w_0, y_2 / w_1, ...)`, a left inverse of the
/// weighted shift on its first `N - 1` blocks.
pub fn left_inverse_of_weighted_shift(shift: &WindowedOperator) -> Result<WindowedOperator> {
    let weights = shift_weights(shift)?;
    let Ambient::Truncated { block, blocks } = shift.ambient() else {
        unreachable!("shift_weights checked the ambient");
    };
    let n = block * blocks;
    let mut m = ComplexMatrix::zeros(n, n);
    for (k, w) in weights.iter().enumerate() {
        for j in 0..block {
            m[(k * block + j, (k + 1) * block + j)] = Complex64::new(1.0 / w, 0.0);
        }
    }
    WindowedOperator::truncated(m, block, blocks, shift.guard())
}

/// The triple `(T, X, V)` standing for `R(X; T, V) = [[T, X], [0, V]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockUpper {
    pub t: WindowedOperator,
    pub x: ComplexMatrix,
    pub v: WindowedOperator,
}

impl BlockUpper {
    pub fn new(t: WindowedOperator, x: ComplexMatrix, v: WindowedOperator) -> Result<Self> {
        if x.shape() != (t.dim(), v.dim()) {
            return Err(Error::DimensionMismatch {
                context: "BlockUpper X block",
                expected: (t.dim(), v.dim()),
                actual: x.shape(),
            });
        }
        Ok(Self { t, x, v })
    }

    pub fn k_dim(&self) -> usize {
        self.t.dim()
    }

    pub fn h_dim(&self) -> usize {
        self.v.dim()
    }

    /// `[[T, X], [0, V]]` as a single matrix.
    pub fn assemble(&self) -> ComplexMatrix {
        let (k, h) = (self.k_dim(), self.h_dim());
        let mut r = ComplexMatrix::zeros(k + h, k + h);
        r.set_block(0, 0, self.t.matrix());
        r.set_block(0, k, &self.x);
        r.set_block(k, k, self.v.matrix());
        r
    }

    /// `R(0) = T (+) V`.
    pub fn diagonal_part(&self) -> ComplexMatrix {
        ComplexMatrix::block_diag(&[self.t.matrix(), self.v.matrix()])
    }

    /// Splits an assembled matrix back into blocks; fails if the lower-left
    /// block is not exactly zero.
    pub fn from_matrix(r: &ComplexMatrix, t_window: Window, v_window: Window) -> Result<Self> {
        let (k, h) = (t_window.ambient.dim(), v_window.ambient.dim());
        if r.shape() != (k + h, k + h) {
            return Err(Error::DimensionMismatch {
                context: "BlockUpper::from_matrix",
                expected: (k + h, k + h),
                actual: r.shape(),
            });
        }
        if r.block(k, 0, h, k).max_abs() != 0.0 {
            return Err(Error::InvalidParameter {
                name: "r",
                reason: "lower-left block is not zero".into(),
            });
        }
        Self::new(
            WindowedOperator::with_window(r.block(0, 0, k, k), t_window)?,
            r.block(0, k, k, h),
            WindowedOperator::with_window(r.block(k, k, h, h), v_window)?,
        )
    }

    /// `sum_{j<n} T^j X V^(n-j-1)`, the upper-right block of `R(X)^n`.
    pub fn power_corner(&self, n: usize) -> ComplexMatrix {
        let t = self.t.matrix();
        let v = self.v.matrix();
        let mut acc = ComplexMatrix::zeros(self.k_dim(), self.h_dim());
        let mut tj = ComplexMatrix::identity(self.k_dim());
        let vpows = v.powers(n.saturating_sub(1));
        for j in 0..n {
            acc = &acc + &tj.matmul(&self.x).matmul(&vpows[n - j - 1]);
            tj = tj.matmul(t);
        }
        acc
    }
}

/// Wraps `R(X)` as a windowed operator on the finite sum space.
pub fn assemble_r(b: &BlockUpper) -> WindowedOperator {
    WindowedOperator::finite(b.assemble()).expect("assembled block operator is square")
}

/// Growth class of a norm sequence.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum Growth {
    Bounded,
    Polynomial { exponent: f64 },
    Exponential { rate: f64 },
}

impl Growth {
    pub fn is_bounded(&self) -> bool {
        matches!(self, Growth::Bounded)
    }
}

const MIN_FIT_INDEX: usize = 3;
const POLY_EXPONENT_THRESHOLD: f64 = 0.5;
const EXP_RATE_THRESHOLD: f64 = 0.02;

fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let resid: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - my - slope * (x - mx)).powi(2))
        .sum();
    (slope, resid)
}

/// Classifies `values[n]` (indexed by `n`) by least-squares fits of
/// `log values` against `n` and `log n`.
///
/// Only indices `n >= 3` in the later half of the sequence enter the fit, so
/// transients (including slowly converging partial sums) are skipped.
pub fn classify_growth(values: &[f64]) -> Growth {
    let start = MIN_FIT_INDEX.max(values.len() / 2);
    let pts: Vec<(f64, f64)> = values
        .iter()
        .enumerate()
        .skip(start)
        .filter(|(_, v)| **v > 0.0 && v.is_finite())
        .map(|(n, v)| (n as f64, v.ln()))
        .collect();
    if pts.len() < 3 {
        return Growth::Bounded;
    }
    let ns: Vec<f64> = pts.iter().map(|p| p.0).collect();
    let logns: Vec<f64> = ns.iter().map(|n| n.ln()).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
    let (rate, exp_resid) = linear_fit(&ns, &ys);
    let (exponent, poly_resid) = linear_fit(&logns, &ys);
    if rate > EXP_RATE_THRESHOLD && exp_resid <= poly_resid {
        Growth::Exponential { rate }
    } else if exponent > POLY_EXPONENT_THRESHOLD {
        Growth::Polynomial { exponent }
    } else {
        Growth::Bounded
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct PowerProfile {
    /// `||A^n||` for `n = 0..=n_max` (shorter if truncated).
    pub norms: Vec<f64>,
    pub growth: Growth,
    /// Set when a power overflowed and the profile was cut short.
    pub truncated: bool,
}

impl PowerProfile {
    pub fn sup(&self) -> f64 {
        self.norms.iter().fold(0.0, |m, &v| m.max(v))
    }
}

const OVERFLOW_GUARD: f64 = 1e250;

pub fn power_profile(a: &ComplexMatrix, n_max: usize, cfg: &ToleranceConfig) -> Result<PowerProfile> {
    if !a.is_square() {
        return Err(Error::NotSquare {
            context: "power_profile",
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    let mut norms = Vec::with_capacity(n_max + 1);
    let mut p = ComplexMatrix::identity(a.rows());
    let mut truncated = false;
    for n in 0..=n_max {
        if n > 0 {
            p = p.matmul(a);
        }
        if !p.is_finite() || p.max_abs() > OVERFLOW_GUARD {
            truncated = true;
            break;
        }
        norms.push(operator_norm(&p, cfg)?);
    }
    let growth = if truncated {
        Growth::Exponential { rate: f64::INFINITY }
    } else {
        classify_growth(&norms)
    };
    Ok(PowerProfile {
        norms,
        growth,
        truncated,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Predicate {
    pub holds: bool,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct StructuralReport {
    /// Number of leading coordinates the on-window predicates were tested on.
    pub window_dim: usize,
    pub isometry_on_window: Predicate,
    pub coisometry_on_window: Predicate,
    pub unitary_on_window: Predicate,
    pub contraction: Predicate,
    pub norm: f64,
}

pub fn structural_predicates(a: &WindowedOperator, cfg: &ToleranceConfig) -> Result<StructuralReport> {
    let m = a.matrix();
    let w = a.window().window_dim();
    let n = m.rows();
    let norm = operator_norm(m, cfg)?;
    let tol = cfg.scaled_identity_tol(norm * norm);

    let cols = m.block(0, 0, n, w);
    let iso = (&cols.adjoint().matmul(&cols) - &ComplexMatrix::identity(w)).max_abs();
    let rows = m.block(0, 0, w, n);
    let coiso = (&rows.matmul(&rows.adjoint()) - &ComplexMatrix::identity(w)).max_abs();

    let isometry_on_window = Predicate {
        holds: iso <= tol,
        residual: iso,
    };
    let coisometry_on_window = Predicate {
        holds: coiso <= tol,
        residual: coiso,
    };
    Ok(StructuralReport {
        window_dim: w,
        isometry_on_window,
        coisometry_on_window,
        unitary_on_window: Predicate {
            holds: isometry_on_window.holds && coisometry_on_window.holds,
            residual: iso.max(coiso),
        },
        contraction: Predicate {
            holds: norm <= 1.0 + cfg.norm_tol.max(cfg.identity_tol),
            residual: (norm - 1.0).max(0.0),
        },
        norm,
    })
}
