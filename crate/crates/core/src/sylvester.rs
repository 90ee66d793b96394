//! The commutator equation `X = TZ - ZV`: direct and partial-sum solvers,
//! growth conditions, the `X = A + F` splittings and similarity certificates.
//!
//! Vectorization is column-stacking: `vec(TZ - ZV) = (I (x) T - V^T (x) I) vec(Z)`.

use crate::error::{Error, Result};
use crate::linalg::{kron, lstsq, operator_norm, ComplexMatrix, LuFactors, ToleranceConfig};
use crate::operator::{classify_growth, Growth};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Kronecker,
    PartialSum,
    Cesaro,
    /// Cesaro means of the two-sided sums for `X = V^* Z - Z V`.
    Symmetric,
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Solvability {
    Unique {
        condition: f64,
    },
    /// The Kronecker operator is numerically singular: `sigma(T)` and
    /// `sigma(V)` (nearly) meet. `Z` is then a least-squares solution.
    SpectraOverlap {
        condition: f64,
    },
}

#[derive(Debug, Clone)]
pub struct SylvesterSolution {
    pub z: ComplexMatrix,
    /// `||TZ - ZV - X||`.
    pub residual: f64,
    /// `||Z(I - VV^*)||` for the partial-sum routes.
    pub side_condition_residual: Option<f64>,
    pub method: Method,
    pub solvability: Option<Solvability>,
    /// `||Z_n||` for the partial-sum routes.
    pub partial_norms: Vec<f64>,
}

fn check_square(m: &ComplexMatrix, context: &'static str) -> Result<()> {
    if m.is_square() {
        Ok(())
    } else {
        Err(Error::NotSquare {
            context,
            rows: m.rows(),
            cols: m.cols(),
        })
    }
}

fn check_equation_dims(t: &ComplexMatrix, v: &ComplexMatrix, x: &ComplexMatrix, context: &'static str) -> Result<()> {
    check_square(t, context)?;
    check_square(v, context)?;
    if x.shape() != (t.rows(), v.rows()) {
        return Err(Error::DimensionMismatch {
            context,
            expected: (t.rows(), v.rows()),
            actual: x.shape(),
        });
    }
    Ok(())
}

/// `TZ - ZV`.
pub fn commutator(t: &ComplexMatrix, v: &ComplexMatrix, z: &ComplexMatrix) -> ComplexMatrix {
    &t.matmul(z) - &z.matmul(v)
}

/// `||TZ - ZV - X||`.
pub fn sylvester_residual(
    t: &ComplexMatrix,
    v: &ComplexMatrix,
    x: &ComplexMatrix,
    z: &ComplexMatrix,
    cfg: &ToleranceConfig,
) -> Result<f64> {
    operator_norm(&(&commutator(t, v, z) - x), cfg)
}

/// Tolerance for accepting `Z` as a solution: `solve_tol` relative to the
/// sizes of the terms involved.
fn solution_tolerance(
    t: &ComplexMatrix,
    v: &ComplexMatrix,
    x: &ComplexMatrix,
    z: &ComplexMatrix,
    cfg: &ToleranceConfig,
) -> Result<f64> {
    let nz = operator_norm(z, cfg)?;
    let scale = operator_norm(x, cfg)?
        .max(operator_norm(t, cfg)? * nz)
        .max(nz * operator_norm(v, cfg)?);
    Ok(cfg.solve_tol * scale.max(1.0))
}

fn require_solution(
    t: &ComplexMatrix,
    v: &ComplexMatrix,
    x: &ComplexMatrix,
    z: &ComplexMatrix,
    cfg: &ToleranceConfig,
) -> Result<()> {
    if z.shape() != x.shape() {
        return Err(Error::DimensionMismatch {
            context: "Z",
            expected: x.shape(),
            actual: z.shape(),
        });
    }
    let residual = sylvester_residual(t, v, x, z, cfg)?;
    let tolerance = solution_tolerance(t, v, x, z, cfg)?;
    if residual > tolerance {
        return Err(Error::NotASolution { residual, tolerance });
    }
    Ok(())
}

/// Solves `TZ - ZV = X` through the `kh x kh` Kronecker system.
///
/// When the system's condition estimate exceeds `1 / solve_tol` (or LU
/// breaks down) the verdict is [`Solvability::SpectraOverlap`] and `Z` is a
/// rank-revealing least-squares solution.
pub fn solve_sylvester_direct(
    t: &ComplexMatrix,
    v: &ComplexMatrix,
    x: &ComplexMatrix,
    cfg: &ToleranceConfig,
) -> Result<SylvesterSolution> {
    check_equation_dims(t, v, x, "solve_sylvester_direct")?;
    let (k, h) = x.shape();
    let system = &kron(&ComplexMatrix::identity(h), t, cfg.size_cap)?
        - &kron(&v.transpose(), &ComplexMatrix::identity(k), cfg.size_cap)?;
    let rhs = x.vec_columns();

    let factored = LuFactors::new(&system).ok().map(|f| {
        let c = f.condition_estimate();
        (f, c)
    });
    let (zvec, solvability) = match factored {
        Some((f, condition)) if condition * cfg.solve_tol < 1.0 => {
            (f.solve_vec(&rhs), Solvability::Unique { condition })
        }
        other => {
            let condition = other.map_or(f64::INFINITY, |(_, c)| c);
            let ls = lstsq(&system, &rhs, cfg.solve_tol)?;
            (ls.x, Solvability::SpectraOverlap { condition })
        }
    };
    let z = ComplexMatrix::from_vec_columns(k, h, &zvec);
    let residual = sylvester_residual(t, v, x, &z, cfg)?;
    Ok(SylvesterSolution {
        z,
        residual,
        side_condition_residual: None,
        method: Method::Kronecker,
        solvability: Some(solvability),
        partial_norms: Vec::new(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SumMode {
    /// `Z_n = -sum_{j<=n} T^j X V^{*(j+1)}` at `n = n_max`.
    Plain,
    /// Average of `Z_0, ..., Z_{n_max}`, standing in for a Banach limit.
    Cesaro,
    /// Average of `sum_{j<=n} (V^{j+1} X V^j - V^{*j} X V^{*(j+1)}) / 2`;
    /// requires `T = V^*`.
    Symmetric,
}

/// Streams the terms of the three growth sums.
struct TermStream<'a> {
    side: Side,
    t: &'a ComplexMatrix,
    v: &'a ComplexMatrix,
    ta: ComplexMatrix,
    va: ComplexMatrix,
    a: ComplexMatrix,
    b: ComplexMatrix,
}

impl<'a> TermStream<'a> {
    fn new(side: Side, t: &'a ComplexMatrix, v: &'a ComplexMatrix, x: &ComplexMatrix) -> Self {
        let ta = t.adjoint();
        let va = v.adjoint();
        let (a, b) = match side {
            Side::Right => (x.matmul(&va), ComplexMatrix::zeros(0, 0)),
            Side::Left => (ta.matmul(x), ComplexMatrix::zeros(0, 0)),
            Side::Symmetric => (v.matmul(x), x.matmul(&va)),
        };
        Self {
            side,
            t,
            v,
            ta,
            va,
            a,
            b,
        }
    }

    /// Returns the current term and advances.
    fn next_term(&mut self) -> ComplexMatrix {
        match self.side {
            Side::Right => {
                let next = self.t.matmul(&self.a).matmul(&self.va);
                std::mem::replace(&mut self.a, next)
            }
            Side::Left => {
                let next = self.ta.matmul(&self.a).matmul(self.v);
                std::mem::replace(&mut self.a, next)
            }
            Side::Symmetric => {
                let term = &self.a - &self.b;
                self.a = self.v.matmul(&self.a).matmul(self.v);
                self.b = self.va.matmul(&self.b).matmul(&self.va);
                term
            }
        }
    }
}

/// Builds `Z` from partial sums of the growth series.
///
/// Fails with [`Error::Diverging`] when `||Z_n||` is classified as growing.
pub fn partial_sum_solution(
    t: &ComplexMatrix,
    v: &ComplexMatrix,
    x: &ComplexMatrix,
    n_max: usize,
    mode: SumMode,
    cfg: &ToleranceConfig,
) -> Result<SylvesterSolution> {
    check_equation_dims(t, v, x, "partial_sum_solution")?;
    let (side, sign) = match mode {
        SumMode::Plain | SumMode::Cesaro => (Side::Right, -1.0),
        SumMode::Symmetric => {
            let gap = (t - &v.adjoint()).max_abs();
            if gap > cfg.scaled_identity_tol(v.max_abs()) {
                return Err(Error::InvalidParameter {
                    name: "t",
                    reason: format!("symmetric sums need T = V^*, off by {gap:e}"),
                });
            }
            (Side::Symmetric, 0.5)
        }
    };
    let mut stream = TermStream::new(side, t, v, x);
    let mut sum = ComplexMatrix::zeros(x.rows(), x.cols());
    let mut mean = ComplexMatrix::zeros(x.rows(), x.cols());
    let mut partial_norms = Vec::with_capacity(n_max + 1);
    for _ in 0..=n_max {
        sum.axpy(num_complex::Complex64::new(sign, 0.0), &stream.next_term());
        partial_norms.push(operator_norm(&sum, cfg)?);
        mean = &mean + &sum;
    }
    let growth = classify_growth(&partial_norms);
    if !growth.is_bounded() {
        return Err(Error::Diverging { growth, partial_norms });
    }
    let (z, method) = match mode {
        SumMode::Plain => (sum, Method::PartialSum),
        SumMode::Cesaro => (mean.scale_real(1.0 / (n_max + 1) as f64), Method::Cesaro),
        SumMode::Symmetric => (mean.scale_real(1.0 / (n_max + 1) as f64), Method::Symmetric),
    };
    let residual = sylvester_residual(t, v, x, &z, cfg)?;
    let side_condition_residual = match mode {
        SumMode::Symmetric => None,
        _ => {
            let proj = &ComplexMatrix::identity(v.rows()) - &v.matmul(&v.adjoint());
            Some(operator_norm(&z.matmul(&proj), cfg)?)
        }
    };
    Ok(SylvesterSolution {
        z,
        residual,
        side_condition_residual,
        method,
        solvability: None,
        partial_norms,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    /// `sum_{j<=n} T^j X V^{*(j+1)}`.
    Right,
    /// `sum_{j<=n} T^{*(j+1)} X V^j`.
    Left,
    /// `sum_{j<=n} (V^{j+1} X V^j - V^{*j} X V^{*(j+1)})`, single operator `V`.
    Symmetric,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct GrowthReport {
    pub side: Side,
    pub partial_norms: Vec<f64>,
    pub sup_value: f64,
    pub growth: Growth,
    pub bounded: bool,
    /// Right side only: whether the partial-sum solver reached the same
    /// boundedness verdict, and the residual of its Cesaro solution.
    pub solver_agrees: Option<bool>,
    pub solver_residual: Option<f64>,
}

pub fn growth_condition(
    t: &ComplexMatrix,
    v: &ComplexMatrix,
    x: &ComplexMatrix,
    n_max: usize,
    side: Side,
    cfg: &ToleranceConfig,
) -> Result<GrowthReport> {
    match side {
        Side::Symmetric => {
            check_square(v, "growth_condition")?;
            if x.shape() != v.shape() {
                return Err(Error::DimensionMismatch {
                    context: "growth_condition",
                    expected: v.shape(),
                    actual: x.shape(),
                });
            }
        }
        _ => check_equation_dims(t, v, x, "growth_condition")?,
    }
    let mut stream = TermStream::new(side, t, v, x);
    let mut sum = ComplexMatrix::zeros(x.rows(), x.cols());
    let mut partial_norms = Vec::with_capacity(n_max + 1);
    for _ in 0..=n_max {
        sum = &sum + &stream.next_term();
        partial_norms.push(operator_norm(&sum, cfg)?);
    }
    let sup_value = partial_norms.iter().fold(0.0, |m: f64, &v| m.max(v));
    let growth = classify_growth(&partial_norms);
    let bounded = growth.is_bounded();
    let (solver_agrees, solver_residual) = if side == Side::Right {
        match partial_sum_solution(t, v, x, n_max, SumMode::Cesaro, cfg) {
            Ok(sol) => (Some(bounded), Some(sol.residual)),
            Err(Error::Diverging { .. }) => (Some(!bounded), None),
            Err(e) => return Err(e),
        }
    } else {
        (None, None)
    };
    Ok(GrowthReport {
        side,
        partial_norms,
        sup_value,
        growth,
        bounded,
        solver_agrees,
        solver_residual,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecompositionCase {
    /// `T` a coisometry: `F = -(I - T^*T) Z V`, `TF = 0`.
    Coisometry,
    /// `V` an isometry: `F = T Z (I - VV^*)`, `FV = 0`.
    Isometry,
    /// `V = S_w` a weighted shift with left inverse `L`: `F = TZ(I - S_w L)`.
    Weighted,
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct DecompositionResiduals {
    /// `||X - A - F||`.
    pub split: f64,
    /// `||TF||` (coisometry) or `||FV||` (isometry, weighted).
    pub annihilation: f64,
    /// `||A - (TD - DV)||`.
    pub representation: f64,
    /// `||(I - T^*T) D||`, `||D (I - VV^*)||` or `||D (I - S_w L)||`.
    pub side_condition: f64,
    /// `||E^2||` for `E = [[0, F], [0, 0]]`.
    pub nilpotent: f64,
    /// `||E R(A)||`, or `||R(A) E||` in the coisometry case where the
    /// product vanishes in that order instead.
    pub zero_product: f64,
}

impl DecompositionResiduals {
    pub fn max(&self) -> f64 {
        [
            self.split,
            self.annihilation,
            self.representation,
            self.side_condition,
            self.nilpotent,
            self.zero_product,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone)]
pub struct Decomposition {
    pub case: DecompositionCase,
    pub a: ComplexMatrix,
    pub f: ComplexMatrix,
    pub d: ComplexMatrix,
    pub residuals: DecompositionResiduals,
}

impl Decomposition {
    /// `E = [[0, F], [0, 0]]` on `K (+) H`.
    pub fn perturbation_block(&self) -> ComplexMatrix {
        let (k, h) = self.f.shape();
        let mut e = ComplexMatrix::zeros(k + h, k + h);
        e.set_block(0, k, &self.f);
        e
    }

    /// `R(A) = [[T, A], [0, V]]`.
    pub fn r_a(&self, t: &ComplexMatrix, v: &ComplexMatrix) -> ComplexMatrix {
        let (k, h) = self.a.shape();
        let mut r = ComplexMatrix::zeros(k + h, k + h);
        r.set_block(0, 0, t);
        r.set_block(0, k, &self.a);
        r.set_block(k, k, v);
        r
    }
}

fn finish_decomposition(
    case: DecompositionCase,
    t: &ComplexMatrix,
    v: &ComplexMatrix,
    x: &ComplexMatrix,
    f: ComplexMatrix,
    d: ComplexMatrix,
    side: ComplexMatrix,
    cfg: &ToleranceConfig,
) -> Result<Decomposition> {
    let a = x - &f;
    let norm = |m: &ComplexMatrix| operator_norm(m, cfg);
    let annihilation = match case {
        DecompositionCase::Coisometry => norm(&t.matmul(&f))?,
        _ => norm(&f.matmul(v))?,
    };
    let mut dec = Decomposition {
        case,
        a,
        f,
        d,
        residuals: DecompositionResiduals {
            split: 0.0,
            annihilation,
            representation: 0.0,
            side_condition: norm(&side)?,
            nilpotent: 0.0,
            zero_product: 0.0,
        },
    };
    dec.residuals.split = norm(&(&(x - &dec.a) - &dec.f))?;
    dec.residuals.representation = norm(&(&dec.a - &commutator(t, v, &dec.d)))?;
    let e = dec.perturbation_block();
    let ra = dec.r_a(t, v);
    dec.residuals.nilpotent = norm(&e.matmul(&e))?;
    dec.residuals.zero_product = match case {
        DecompositionCase::Coisometry => norm(&ra.matmul(&e))?,
        _ => norm(&e.matmul(&ra))?,
    };
    Ok(dec)
}

pub fn decompose_coisometry_case(
    t: &ComplexMatrix,
    v: &ComplexMatrix,
    x: &ComplexMatrix,
    z: &ComplexMatrix,
    cfg: &ToleranceConfig,
) -> Result<Decomposition> {
    check_equation_dims(t, v, x, "decompose_coisometry_case")?;
    require_solution(t, v, x, z, cfg)?;
    let tt = t.adjoint().matmul(t);
    let defect = &ComplexMatrix::identity(t.rows()) - &tt;
    let f = -&defect.matmul(z).matmul(v);
    let d = tt.matmul(z);
    let side = defect.matmul(&d);
    finish_decomposition(DecompositionCase::Coisometry, t, v, x, f, d, side, cfg)
}

pub fn decompose_isometry_case(
    t: &ComplexMatrix,
    v: &ComplexMatrix,
    x: &ComplexMatrix,
    z: &ComplexMatrix,
    cfg: &ToleranceConfig,
) -> Result<Decomposition> {
    check_equation_dims(t, v, x, "decompose_isometry_case")?;
    require_solution(t, v, x, z, cfg)?;
    let vv = v.matmul(&v.adjoint());
    let defect = &ComplexMatrix::identity(v.rows()) - &vv;
    let f = t.matmul(z).matmul(&defect);
    let d = z.matmul(&vv);
    let side = d.matmul(&defect);
    finish_decomposition(DecompositionCase::Isometry, t, v, x, f, d, side, cfg)
}

/// `s` is the weighted shift and `l` a left inverse of it on the window.
pub fn decompose_weighted_case(
    t: &ComplexMatrix,
    s: &ComplexMatrix,
    l: &ComplexMatrix,
    x: &ComplexMatrix,
    z: &ComplexMatrix,
    cfg: &ToleranceConfig,
) -> Result<Decomposition> {
    check_equation_dims(t, s, x, "decompose_weighted_case")?;
    if l.shape() != s.shape() {
        return Err(Error::DimensionMismatch {
            context: "left inverse",
            expected: s.shape(),
            actual: l.shape(),
        });
    }
    require_solution(t, s, x, z, cfg)?;
    let sl = s.matmul(l);
    let defect = &ComplexMatrix::identity(s.rows()) - &sl;
    let f = t.matmul(z).matmul(&defect);
    let d = z.matmul(&sl);
    let side = d.matmul(&defect);
    finish_decomposition(DecompositionCase::Weighted, t, s, x, f, d, side, cfg)
}

/// `Z = D - F L` for a chosen left inverse `L` of `V`; solves `X = TZ - ZV`
/// when `A = TD - DV`, `TF = 0` and `LV = I`.
pub fn solution_from_decomposition(d: &ComplexMatrix, f: &ComplexMatrix, l: &ComplexMatrix) -> ComplexMatrix {
    d - &f.matmul(l)
}

#[derive(Debug, Clone)]
pub struct Certificate {
    /// `L = [[I, Z], [0, I]]`, with `L R(X) L^{-1} = T (+) V`.
    pub similarity: ComplexMatrix,
    pub conjugation_residual: f64,
    pub tolerance: f64,
    /// `||T (+) V||`.
    pub diagonal_norm: f64,
    /// `||L|| ||L^{-1}||`.
    pub condition_number: f64,
}

/// Checks `L R(X) L^{-1} = T (+) V` for `L = [[I, Z], [0, I]]`.
pub fn certify_similarity(
    b: &crate::operator::BlockUpper,
    z: &ComplexMatrix,
    cfg: &ToleranceConfig,
) -> Result<Certificate> {
    let (k, h) = (b.k_dim(), b.h_dim());
    if z.shape() != (k, h) {
        return Err(Error::DimensionMismatch {
            context: "certify_similarity",
            expected: (k, h),
            actual: z.shape(),
        });
    }
    let mut l = ComplexMatrix::identity(k + h);
    l.set_block(0, k, z);
    let mut l_inv = ComplexMatrix::identity(k + h);
    l_inv.set_block(0, k, &-z);

    let r = b.assemble();
    let conj = l.matmul(&r).matmul(&l_inv);
    let diag = b.diagonal_part();
    let conjugation_residual = operator_norm(&(&conj - &diag), cfg)?;
    let ln = operator_norm(&l, cfg)?;
    let lin = operator_norm(&l_inv, cfg)?;
    let tolerance = cfg.scaled_identity_tol(ln * lin * operator_norm(&r, cfg)?);
    if conjugation_residual > tolerance {
        return Err(Error::CertificateRefused {
            residual: conjugation_residual,
            tolerance,
        });
    }
    Ok(Certificate {
        similarity: l,
        conjugation_residual,
        tolerance,
        diagonal_norm: operator_norm(&diag, cfg)?,
        condition_number: ln * lin,
    })
}
