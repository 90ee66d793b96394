//! Zero-product perturbations `T = C + E` with `EC = 0`: the expansion
//! `P(T) = sum_n P_(n)(C) E^n`, the summability of `log(n+2) ||E^n||`, the
//! Dirichlet-kernel control of `P_(n)` and a small gallery of named instances.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::car::{foguel_hankel, HankelSpec};
use crate::error::{Error, Result};
use crate::linalg::{kron, operator_norm, spectral_radius, ComplexMatrix, RadiusVerdict, ToleranceConfig};

/// `P(z) = sum_j A_j z^j` with `p x p` coefficients. The degree is the stored
/// bound; trailing zero coefficients are kept.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixPolynomial {
    size: usize,
    coeffs: Vec<ComplexMatrix>,
}

impl MatrixPolynomial {
    pub fn new(coeffs: Vec<ComplexMatrix>) -> Result<Self> {
        let Some(first) = coeffs.first() else {
            return Err(Error::Empty {
                context: "MatrixPolynomial::new",
            });
        };
        let size = first.rows();
        for c in &coeffs {
            if c.shape() != (size, size) {
                return Err(Error::DimensionMismatch {
                    context: "MatrixPolynomial::new",
                    expected: (size, size),
                    actual: c.shape(),
                });
            }
        }
        if size == 0 {
            return Err(Error::Empty {
                context: "MatrixPolynomial::new",
            });
        }
        Ok(Self { size, coeffs })
    }

    pub fn zero(size: usize) -> Self {
        Self {
            size,
            coeffs: Vec::new(),
        }
    }

    /// Scalar polynomial (`p = 1`).
    pub fn scalar(coeffs: &[Complex64]) -> Self {
        Self {
            size: 1,
            coeffs: coeffs.iter().map(|&c| ComplexMatrix::diag(&[c])).collect(),
        }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Stored degree; `-1` for the zero polynomial.
    pub fn degree(&self) -> isize {
        self.coeffs.len() as isize - 1
    }

    pub fn coeffs(&self) -> &[ComplexMatrix] {
        &self.coeffs
    }

    pub fn coefficient(&self, j: usize) -> ComplexMatrix {
        self.coeffs
            .get(j)
            .cloned()
            .unwrap_or_else(|| ComplexMatrix::zeros(self.size, self.size))
    }

    /// `P(z)` by Horner's rule.
    pub fn eval(&self, z: Complex64) -> ComplexMatrix {
        let mut acc = ComplexMatrix::zeros(self.size, self.size);
        for c in self.coeffs.iter().rev() {
            acc = &acc.scale(z) + c;
        }
        acc
    }
}

/// `P_(n)(z) = sum_{j>=n} A_j z^{j-n}`.
pub fn shift_poly(p: &MatrixPolynomial, n: usize) -> MatrixPolynomial {
    MatrixPolynomial {
        size: p.size,
        coeffs: p.coeffs.iter().skip(n).cloned().collect(),
    }
}

/// `P(T) = sum_j A_j (x) T^j`, a `p x p` grid of `m x m` blocks.
pub fn eval_poly_at_operator(p: &MatrixPolynomial, t: &ComplexMatrix, cfg: &ToleranceConfig) -> Result<ComplexMatrix> {
    if !t.is_square() {
        return Err(Error::NotSquare {
            context: "eval_poly_at_operator",
            rows: t.rows(),
            cols: t.cols(),
        });
    }
    let dim = p.size * t.rows();
    if dim > cfg.size_cap {
        return Err(Error::SizeCap {
            context: "eval_poly_at_operator",
            size: dim,
            cap: cfg.size_cap,
        });
    }
    let mut out = ComplexMatrix::zeros(dim, dim);
    let mut tj = ComplexMatrix::identity(t.rows());
    for (j, a) in p.coeffs.iter().enumerate() {
        if j > 0 {
            tj = tj.matmul(t);
        }
        out = &out + &kron(a, &tj, cfg.size_cap)?;
    }
    Ok(out)
}

fn check_same(e: &ComplexMatrix, c: &ComplexMatrix, context: &'static str) -> Result<()> {
    if !e.is_square() {
        return Err(Error::NotSquare {
            context,
            rows: e.rows(),
            cols: e.cols(),
        });
    }
    if c.shape() != e.shape() {
        return Err(Error::DimensionMismatch {
            context,
            expected: e.shape(),
            actual: c.shape(),
        });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZeroProductReport {
    pub ec_norm: f64,
    pub is_zero_product: bool,
    /// Smallest `k <= dim` with `E^k = 0` (within tolerance).
    pub nilpotency_order: Option<usize>,
    pub spectral_radius: RadiusVerdict,
}

pub fn zero_product_check(e: &ComplexMatrix, c: &ComplexMatrix, cfg: &ToleranceConfig) -> Result<ZeroProductReport> {
    check_same(e, c, "zero_product_check")?;
    let ec_norm = operator_norm(&e.matmul(c), cfg)?;
    let e_norm = operator_norm(e, cfg)?;
    let c_norm = operator_norm(c, cfg)?;
    let mut nilpotency_order = None;
    let mut ek = e.clone();
    for k in 1..=e.rows() {
        if ek.max_abs() <= cfg.scaled_identity_tol(e_norm.powi(k as i32)) {
            nilpotency_order = Some(k);
            break;
        }
        ek = ek.matmul(e);
    }
    Ok(ZeroProductReport {
        ec_norm,
        is_zero_product: ec_norm <= cfg.scaled_identity_tol(e_norm * c_norm),
        nilpotency_order,
        spectral_radius: spectral_radius(e, cfg)?.verdict,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct SumIdentityReport {
    /// `||P(C+E) - sum_{n<=d} P_(n)(C) E^n||`.
    pub residual: f64,
    pub ec_norm: f64,
    /// Whether `EC = 0` held, i.e. whether the identity is expected.
    pub precondition_holds: bool,
}

pub fn verify_sum_identity(
    p: &MatrixPolynomial,
    c: &ComplexMatrix,
    e: &ComplexMatrix,
    cfg: &ToleranceConfig,
) -> Result<SumIdentityReport> {
    check_same(e, c, "verify_sum_identity")?;
    let m = c.rows();
    let lhs = eval_poly_at_operator(p, &(c + e), cfg)?;
    let mut rhs = ComplexMatrix::zeros(lhs.rows(), lhs.cols());
    let ip = ComplexMatrix::identity(p.size);
    let mut en = ComplexMatrix::identity(m);
    for n in 0..p.coeffs.len() {
        if n > 0 {
            en = en.matmul(e);
        }
        let term = eval_poly_at_operator(&shift_poly(p, n), c, cfg)?.matmul(&kron(&ip, &en, cfg.size_cap)?);
        rhs = &rhs + &term;
    }
    let ec_norm = operator_norm(&e.matmul(c), cfg)?;
    let scale = operator_norm(e, cfg)? * operator_norm(c, cfg)?;
    Ok(SumIdentityReport {
        residual: operator_norm(&(&lhs - &rhs), cfg)?,
        ec_norm,
        precondition_holds: ec_norm <= cfg.scaled_identity_tol(scale),
    })
}

/// Spectral radii within this margin of 1 are treated as divergent.
pub const RADIUS_MARGIN: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Summability {
    Convergent,
    Divergent,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RotaReport {
    /// `sum_{n<=n_max} log(n+2) ||E^n||`.
    pub partial_sum: f64,
    /// Upper bound for the remaining tail; `None` when divergent or when no
    /// power with `||E^m|| < 1` was found.
    pub tail_bound: Option<f64>,
    pub verdict: Summability,
    pub radius: RadiusVerdict,
    /// `||E^n||` for `n = 0..=n_max`.
    pub norms: Vec<f64>,
}

/// The tail `sum_{n>n_max}` is bounded by splitting `n = n_max + 1 + i + m l`
/// with `q = ||E^m|| < 1`, so `||E^n|| <= ||E^{n_max+1+i}|| q^l`, and by
/// `log(a + m l) <= log a + m l / a`.
pub fn rota_summability(e: &ComplexMatrix, n_max: usize, cfg: &ToleranceConfig) -> Result<RotaReport> {
    if !e.is_square() {
        return Err(Error::NotSquare {
            context: "rota_summability",
            rows: e.rows(),
            cols: e.cols(),
        });
    }
    let radius = spectral_radius(e, cfg)?.verdict;
    let convergent = radius.is_below(1.0 - RADIUS_MARGIN);
    let horizon = if convergent { 2 * n_max + 1 } else { n_max };
    let mut norms = Vec::with_capacity(horizon + 1);
    let mut en = ComplexMatrix::identity(e.rows());
    for n in 0..=horizon {
        if n > 0 {
            en = en.matmul(e);
        }
        norms.push(operator_norm(&en, cfg)?);
    }
    let partial_sum = (0..=n_max).map(|n| ((n + 2) as f64).ln() * norms[n]).sum();
    let tail_bound = if convergent {
        (1..=n_max + 1).find(|&m| norms[m] < 1.0).map(|m| {
            let q = norms[m];
            (0..m)
                .map(|i| {
                    let a = (n_max + 3 + i) as f64;
                    let mf = m as f64;
                    norms[n_max + 1 + i] * (a.ln() / (1.0 - q) + (mf / a) * q / ((1.0 - q) * (1.0 - q)))
                })
                .sum()
        })
    } else {
        None
    };
    norms.truncate(n_max + 1);
    Ok(RotaReport {
        partial_sum,
        tail_bound,
        verdict: if convergent {
            Summability::Convergent
        } else {
            Summability::Divergent
        },
        radius,
        norms,
    })
}

fn dirichlet_kernel(n: usize, t: f64) -> f64 {
    let half = 0.5 * t;
    if half.sin().abs() < 1e-8 {
        return (2 * n + 1) as f64;
    }
    ((n as f64 + 0.5) * t).sin() / half.sin()
}

fn simpson(f: &impl Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
    let m = 0.5 * (a + b);
    let fm = f(m);
    (m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb))
}

#[allow(clippy::too_many_arguments)]
fn adaptive_simpson(
    f: &impl Fn(f64) -> f64,
    a: f64,
    fa: f64,
    b: f64,
    fb: f64,
    m: f64,
    fm: f64,
    whole: f64,
    eps: f64,
    depth: usize,
) -> f64 {
    let (lm, flm, left) = simpson(f, a, fa, m, fm);
    let (rm, frm, right) = simpson(f, m, fm, b, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * eps {
        return left + right + delta / 15.0;
    }
    adaptive_simpson(f, a, fa, m, fm, lm, flm, left, 0.5 * eps, depth - 1)
        + adaptive_simpson(f, m, fm, b, fb, rm, frm, right, 0.5 * eps, depth - 1)
}

/// `(1/2pi) int_0^{2pi} |D_n(t)| dt` with `D_n(t) = sin((n+1/2)t) / sin(t/2)`.
///
/// The kernel is even, so only `[0, pi]` is integrated, split at the zeros
/// `2 pi k / (2n+1)` so that each piece has a smooth integrand.
pub fn dirichlet_l1(n: usize) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let f = |t: f64| dirichlet_kernel(n, t).abs();
    let h = 2.0 * PI / (2 * n + 1) as f64;
    let mut cuts: Vec<f64> = (0..=n).map(|k| k as f64 * h).collect();
    cuts.push(PI);
    let pieces = cuts.len() - 1;
    let eps = 1e-11 * PI / pieces as f64;
    let mut total = 0.0;
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (fa, fb) = (f(a), f(b));
        let (m, fm, whole) = simpson(&f, a, fa, b, fb);
        total += adaptive_simpson(&f, a, fa, b, fb, m, fm, whole, eps, 40);
    }
    total / PI
}

fn unit_grid(size: usize) -> impl Iterator<Item = Complex64> {
    (0..size).map(move |k| Complex64::from_polar(1.0, 2.0 * PI * k as f64 / size as f64))
}

fn grid_sup(p: &MatrixPolynomial, size: usize, cfg: &ToleranceConfig) -> Result<f64> {
    let mut best = 0.0f64;
    for z in unit_grid(size) {
        best = best.max(operator_norm(&p.eval(z), cfg)?);
    }
    Ok(best)
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct SupNorm {
    pub value: f64,
    pub grid_size: usize,
    /// Value on the doubled grid.
    pub refined: f64,
    pub refinement_gap: f64,
}

/// `max_k ||P(z_k)||` over `grid_size` equally spaced points of the circle.
pub fn sup_circle_norm(p: &MatrixPolynomial, grid_size: usize, cfg: &ToleranceConfig) -> Result<SupNorm> {
    let need = 4 * (p.degree() + 1).max(0) as usize;
    if grid_size < need.max(1) {
        return Err(Error::InvalidParameter {
            name: "grid_size",
            reason: format!(
                "{grid_size} points cannot resolve degree {} (need >= {need})",
                p.degree()
            ),
        });
    }
    let value = grid_sup(p, grid_size, cfg)?;
    let refined = grid_sup(p, 2 * grid_size, cfg)?;
    Ok(SupNorm {
        value,
        grid_size,
        refined,
        refinement_gap: (refined - value).abs(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ShiftBoundReport {
    pub n: usize,
    /// `max_k ||z^n P_(n)(z) - (P - D_{n-1} * P)(z)||` on the grid, with the
    /// convolution taken through a discrete Fourier transform of the samples.
    pub convolution_residual: f64,
    pub shifted_sup: f64,
    pub sup: f64,
    /// `L_{n-1}`, the Dirichlet-kernel `L^1` norm.
    pub dirichlet: f64,
    /// `(1 + L_{n-1}) sup`.
    pub bound: f64,
    pub holds: bool,
}

/// Grid used by the shift-bound checks.
pub fn default_grid(p: &MatrixPolynomial) -> usize {
    64 * ((p.degree() + 1).max(1) as usize)
}

pub fn shift_bound_check(
    p: &MatrixPolynomial,
    n: usize,
    grid_size: usize,
    cfg: &ToleranceConfig,
) -> Result<ShiftBoundReport> {
    if n == 0 {
        return Err(Error::InvalidParameter {
            name: "n",
            reason: "the shift bound needs n >= 1".into(),
        });
    }
    let need = (p.degree() + 1).max(1) as usize;
    if grid_size <= need {
        return Err(Error::InvalidParameter {
            name: "grid_size",
            reason: format!("{grid_size} points alias degree {}", p.degree()),
        });
    }
    let pn = shift_poly(p, n);
    let samples: Vec<(Complex64, ComplexMatrix)> = unit_grid(grid_size).map(|z| (z, p.eval(z))).collect();
    let g = grid_size as f64;
    // Fourier coefficients of P for |j| <= n-1 from the samples.
    let top = (n - 1) as isize;
    let fourier: Vec<(isize, ComplexMatrix)> = (-top..=top)
        .map(|j| {
            let mut acc = ComplexMatrix::zeros(p.size, p.size);
            for (z, pz) in &samples {
                acc = &acc + &pz.scale(z.powi(-j as i32));
            }
            (j, acc.scale_real(1.0 / g))
        })
        .collect();
    let mut convolution_residual = 0.0f64;
    let mut shifted_sup = 0.0f64;
    let mut sup = 0.0f64;
    for (z, pz) in &samples {
        let mut trunc = ComplexMatrix::zeros(p.size, p.size);
        for (j, c) in &fourier {
            trunc = &trunc + &c.scale(z.powi(*j as i32));
        }
        let pnz = pn.eval(*z);
        let lhs = pnz.scale(z.powi(n as i32));
        convolution_residual = convolution_residual.max((&lhs - &(pz - &trunc)).max_abs());
        shifted_sup = shifted_sup.max(operator_norm(&pnz, cfg)?);
        sup = sup.max(operator_norm(pz, cfg)?);
    }
    let dirichlet = dirichlet_l1(n - 1);
    let bound = (1.0 + dirichlet) * sup;
    Ok(ShiftBoundReport {
        n,
        convolution_residual,
        shifted_sup,
        sup,
        dirichlet,
        bound,
        holds: shifted_sup <= bound * (1.0 + cfg.norm_tol) + cfg.norm_tol,
    })
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ShiftSweep {
    pub reports: Vec<ShiftBoundReport>,
    /// `max_n sup ||P_(n)|| / (log(n+2) sup ||P||)`.
    pub measured_constant: f64,
}

/// `shift_bound_check` for every `n = 1..=deg P + 1`.
pub fn shift_bound_sweep(p: &MatrixPolynomial, grid_size: usize, cfg: &ToleranceConfig) -> Result<ShiftSweep> {
    let last = (p.degree() + 1).max(1) as usize;
    let reports = (1..=last)
        .map(|n| shift_bound_check(p, n, grid_size, cfg))
        .collect::<Result<Vec<_>>>()?;
    let measured_constant = reports
        .iter()
        .filter(|r| r.sup > 0.0)
        .map(|r| r.shifted_sup / (((r.n + 2) as f64).ln() * r.sup))
        .fold(0.0, f64::max);
    Ok(ShiftSweep {
        reports,
        measured_constant,
    })
}

pub const GALLERY_NAMES: [&str; 2] = ["remark35", "foguel-car-w"];

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct GalleryCheck {
    pub name: &'static str,
    pub residual: f64,
}

#[derive(Debug, Clone)]
pub struct GalleryEntry {
    pub name: &'static str,
    pub description: &'static str,
    pub t: ComplexMatrix,
    pub c: ComplexMatrix,
    pub e: ComplexMatrix,
    pub checks: Vec<GalleryCheck>,
}

/// Powers of `[[1,1],[0,1]]` checked against `[[1,n],[0,1]]` up to this.
pub const JORDAN_POWERS: usize = 64;

fn jordan_gallery(cfg: &ToleranceConfig) -> Result<GalleryEntry> {
    let t = ComplexMatrix::from_real_rows(&[&[1.0, 1.0], &[0.0, 1.0]]);
    let c = ComplexMatrix::identity(2);
    let e = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]);
    let mut power = 0.0f64;
    let mut tn = ComplexMatrix::identity(2);
    for n in 1..=JORDAN_POWERS {
        tn = tn.matmul(&t);
        let predicted = ComplexMatrix::from_real_rows(&[&[1.0, n as f64], &[0.0, 1.0]]);
        power = power.max((&tn - &predicted).max_abs());
    }
    let ec = e.matmul(&c);
    let ce = c.matmul(&e);
    Ok(GalleryEntry {
        name: "remark35",
        description: "T = I + N with N^2 = 0: EC = CE = E, not power bounded",
        checks: vec![
            GalleryCheck {
                name: "power_formula",
                residual: power,
            },
            GalleryCheck {
                name: "ec_minus_e",
                residual: operator_norm(&(&ec - &e), cfg)?,
            },
            GalleryCheck {
                name: "ce_minus_e",
                residual: operator_norm(&(&ce - &e), cfg)?,
            },
            GalleryCheck {
                name: "e_squared",
                residual: e.matmul(&e).max_abs(),
            },
        ],
        t,
        c,
        e,
    })
}

/// Rows/columns whose block index (within each summand) is below `keep`.
fn window_indices(block: usize, blocks: usize, keep: usize) -> Vec<usize> {
    let per = block * blocks;
    (0..2 * per).filter(|i| (i % per) / block < keep).collect()
}

fn compress(m: &ComplexMatrix, idx: &[usize]) -> ComplexMatrix {
    ComplexMatrix::from_fn(idx.len(), idx.len(), |i, j| m[(idx[i], idx[j])])
}

fn foguel_car_w(cfg: &ToleranceConfig) -> Result<GalleryEntry> {
    let alpha = vec![
        Complex64::new(1.0, 0.0),
        Complex64::new(0.0, 0.5),
        Complex64::new(-0.25, 0.0),
    ];
    let spec = HankelSpec::new(alpha, 4, 3)?;
    let b = foguel_hankel(&spec)?;
    let t = b.assemble();
    let c = b.diagonal_part();
    let e = &t - &c;
    let idx = window_indices(spec.block_dim(), spec.blocks(), spec.blocks() - 1);
    let comm = &e.matmul(&c) - &c.matmul(&e);
    Ok(GalleryEntry {
        name: "foguel-car-w",
        description: "[[S^*, Gamma], [0, S]] with a CAR-valued Hankel Gamma: E^2 = 0, EC = CE",
        checks: vec![
            GalleryCheck {
                name: "e_squared",
                residual: operator_norm(&e.matmul(&e), cfg)?,
            },
            GalleryCheck {
                name: "ec_minus_ce_window",
                residual: operator_norm(&compress(&comm, &idx), cfg)?,
            },
        ],
        t,
        c,
        e,
    })
}

pub fn gallery_entry(name: &str, cfg: &ToleranceConfig) -> Result<GalleryEntry> {
    match name {
        "remark35" => jordan_gallery(cfg),
        "foguel-car-w" => foguel_car_w(cfg),
        other => Err(Error::UnknownInstance(other.to_string())),
    }
}

pub fn gallery(cfg: &ToleranceConfig) -> Result<Vec<GalleryEntry>> {
    GALLERY_NAMES.iter().map(|n| gallery_entry(n, cfg)).collect()
}
