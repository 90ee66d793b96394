use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::matrix::{inner, vector_norm, ComplexMatrix};
use super::random::random_complex_vector;
use super::ToleranceConfig;
use crate::error::{Error, Result};

const RESTART_SEED: u64 = 0x5e_ed0f_5eed;

/// Largest singular value of `a`.
///
/// Runs Lanczos with full reorthogonalization on the Gram operator (`A*A` or
/// `AA*`, whichever is smaller) from the normalized all-ones vector, then once
/// more from a seeded random vector, and returns the larger Ritz value. The
/// all-ones start is deterministic but can be orthogonal to the top singular
/// subspace; the restart covers that case.
pub fn operator_norm(a: &ComplexMatrix, cfg: &ToleranceConfig) -> Result<f64> {
    if a.is_empty() {
        return Err(Error::Empty {
            context: "operator_norm",
        });
    }
    if a.max_abs() == 0.0 {
        return Ok(0.0);
    }
    let tall = a.rows() >= a.cols();
    let n = if tall { a.cols() } else { a.rows() };
    let gram = |x: &[Complex64]| -> Vec<Complex64> {
        if tall {
            a.adjoint_matvec(&a.matvec(x))
        } else {
            a.matvec(&a.adjoint_matvec(x))
        }
    };

    let ones = vec![Complex64::new(1.0, 0.0); n];
    let first = lanczos_top(&gram, ones, cfg)?;
    let mut rng = ChaCha8Rng::seed_from_u64(RESTART_SEED ^ (n as u64));
    let second = lanczos_top(&gram, random_complex_vector(&mut rng, n), cfg)?;
    Ok(first.max(second).max(0.0).sqrt())
}

/// Largest eigenvalue of a Hermitian positive semidefinite operator.
fn lanczos_top(
    apply: &impl Fn(&[Complex64]) -> Vec<Complex64>,
    start: Vec<Complex64>,
    cfg: &ToleranceConfig,
) -> Result<f64> {
    let n = start.len();
    let start_norm = vector_norm(&start);
    let mut q: Vec<Complex64> = start.iter().map(|&x| x / start_norm).collect();
    let mut basis: Vec<Vec<Complex64>> = Vec::new();
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let cap = cfg.max_norm_iterations.min(n).max(1);

    let mut theta = 0.0;
    let mut residual = f64::INFINITY;
    for _ in 0..cap {
        let mut w = apply(&q);
        let alpha = inner(&w, &q).re;
        basis.push(q);
        alphas.push(alpha);
        // Two passes of classical Gram-Schmidt against the whole basis.
        for _ in 0..2 {
            for b in &basis {
                let proj = inner(&w, b);
                for (wi, &bi) in w.iter_mut().zip(b) {
                    *wi -= proj * bi;
                }
            }
        }
        let beta = vector_norm(&w);

        let (t, last) = tridiagonal_top(&alphas, &betas);
        theta = t;
        residual = beta * last.abs();
        let scale = alphas.iter().fold(0.0f64, |m, &a| m.max(a.abs()));
        if theta <= 0.0 && scale == 0.0 {
            return Ok(0.0);
        }
        if residual <= cfg.norm_tol * theta || beta <= f64::EPSILON * scale || basis.len() == n {
            return Ok(theta);
        }
        betas.push(beta);
        q = w.iter().map(|&x| x / beta).collect();
    }
    Err(Error::NormUnconverged {
        iterations: cap,
        last_estimate: theta.max(0.0).sqrt(),
        residual,
    })
}

/// Largest eigenvalue of the symmetric tridiagonal matrix with diagonal
/// `alphas` and off-diagonal `betas`, with the last component of a unit
/// eigenvector for it.
fn tridiagonal_top(alphas: &[f64], betas: &[f64]) -> (f64, f64) {
    let k = alphas.len();
    if k == 1 {
        return (alphas[0], 1.0);
    }
    let off = |i: usize| betas.get(i).copied().unwrap_or(0.0).abs();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..k {
        let r = off(i) + if i > 0 { off(i - 1) } else { 0.0 };
        lo = lo.min(alphas[i] - r);
        hi = hi.max(alphas[i] + r);
    }
    let zero_pivot = -f64::EPSILON * (hi.abs() + lo.abs()).max(f64::MIN_POSITIVE);
    // Sturm count: number of eigenvalues strictly below x.
    let count_below = |x: f64| -> usize {
        let mut count = 0;
        let mut d = 1.0;
        for i in 0..k {
            let b2 = if i > 0 { off(i - 1).powi(2) } else { 0.0 };
            d = alphas[i] - x - if i > 0 { b2 / d } else { 0.0 };
            if d == 0.0 {
                d = zero_pivot;
            }
            if d < 0.0 {
                count += 1;
            }
        }
        count
    };
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if count_below(mid) >= k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let theta = hi;

    // Inverse iteration for the eigenvector.
    let shift = theta + f64::EPSILON * theta.abs().max(1e-300) * 4.0;
    let mut x = vec![1.0; k];
    for _ in 0..3 {
        x = solve_shifted_tridiagonal(alphas, betas, shift, &x);
        let nrm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(nrm.is_finite() && nrm > 0.0) {
            return (theta, 1.0);
        }
        x.iter_mut().for_each(|v| *v /= nrm);
    }
    (theta, x[k - 1])
}

/// Solves `(T - shift I) x = rhs` for symmetric tridiagonal `T` by Gaussian
/// elimination with partial pivoting.
fn solve_shifted_tridiagonal(alphas: &[f64], betas: &[f64], shift: f64, rhs: &[f64]) -> Vec<f64> {
    let k = alphas.len();
    // Row i holds (sub, diag, sup, sup2) after pivoting.
    let mut sub: Vec<f64> = (0..k).map(|i| if i > 0 { betas[i - 1] } else { 0.0 }).collect();
    let mut dia: Vec<f64> = alphas.iter().map(|a| a - shift).collect();
    let mut sup: Vec<f64> = (0..k).map(|i| if i + 1 < k { betas[i] } else { 0.0 }).collect();
    let mut sup2 = vec![0.0; k];
    let mut b = rhs.to_vec();
    let tiny = f64::EPSILON * dia.iter().chain(betas).fold(1e-300f64, |m, v| m.max(v.abs()));

    for i in 0..k.saturating_sub(1) {
        // Candidate pivot rows: i and i + 1.
        if sub[i + 1].abs() > dia[i].abs() {
            // Swap rows i and i + 1.
            let (d0, s0, t0) = (dia[i], sup[i], sup2[i]);
            dia[i] = sub[i + 1];
            sup[i] = dia[i + 1];
            sup2[i] = sup[i + 1];
            sub[i + 1] = d0;
            dia[i + 1] = s0;
            sup[i + 1] = t0;
            b.swap(i, i + 1);
        }
        if dia[i].abs() < tiny {
            dia[i] = tiny;
        }
        let m = sub[i + 1] / dia[i];
        dia[i + 1] -= m * sup[i];
        sup[i + 1] -= m * sup2[i];
        b[i + 1] -= m * b[i];
        sub[i + 1] = 0.0;
    }
    if dia[k - 1].abs() < tiny {
        dia[k - 1] = tiny;
    }
    let mut x = vec![0.0; k];
    for i in (0..k).rev() {
        let mut acc = b[i];
        if i + 1 < k {
            acc -= sup[i] * x[i + 1];
        }
        if i + 2 < k {
            acc -= sup2[i] * x[i + 2];
        }
        x[i] = acc / dia[i];
    }
    x
}

/// Outcome of the Gelfand squaring estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RadiusVerdict {
    /// Upper-bound-biased estimate of r(A).
    Estimate(f64),
    /// `||A^(2^k)||` left the double range before the estimate settled; the
    /// radius is reported as at least the carried threshold (1).
    AtLeast(f64),
}

impl RadiusVerdict {
    /// Whether the radius is known to be strictly below `bound`.
    pub fn is_below(&self, bound: f64) -> bool {
        match *self {
            RadiusVerdict::Estimate(r) => r < bound,
            RadiusVerdict::AtLeast(_) => false,
        }
    }

    pub fn value(&self) -> f64 {
        match *self {
            RadiusVerdict::Estimate(r) | RadiusVerdict::AtLeast(r) => r,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralRadius {
    pub verdict: RadiusVerdict,
    /// `r_k = ||A^(2^k)||^(1/2^k)` for each squaring performed.
    pub sequence: Vec<f64>,
    pub converged: bool,
}

const MAX_SQUARINGS: usize = 64;

/// Spectral radius by repeated squaring: `r_k = ||A^(2^k)||^(1/2^k)`.
///
/// Each `r_k` bounds `r(A)` from above and the sequence is non-increasing, so
/// the returned value is the last (smallest) term. Powers are renormalized
/// after every squaring and their logarithmic scale is tracked separately, so
/// decaying powers never underflow.
pub fn spectral_radius(a: &ComplexMatrix, cfg: &ToleranceConfig) -> Result<SpectralRadius> {
    if !a.is_square() {
        return Err(Error::NotSquare {
            context: "spectral_radius",
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    let norm0 = operator_norm(a, cfg)?;
    let mut sequence = vec![norm0];
    if norm0 == 0.0 {
        return Ok(SpectralRadius {
            verdict: RadiusVerdict::Estimate(0.0),
            sequence,
            converged: true,
        });
    }
    let log_max = f64::MAX.ln();
    let mut log_scale = norm0.ln();
    let mut b = a.scale_real(1.0 / norm0);
    let mut best = norm0;
    let mut exponent = 1.0f64;
    for _ in 0..MAX_SQUARINGS {
        let sq = b.matmul(&b);
        let nb = operator_norm(&sq, cfg)?;
        exponent *= 2.0;
        if nb == 0.0 {
            sequence.push(0.0);
            return Ok(SpectralRadius {
                verdict: RadiusVerdict::Estimate(0.0),
                sequence,
                converged: true,
            });
        }
        log_scale = 2.0 * log_scale + nb.ln();
        if log_scale > log_max {
            return Ok(SpectralRadius {
                verdict: RadiusVerdict::AtLeast(1.0),
                sequence,
                converged: false,
            });
        }
        let r = (log_scale / exponent).exp();
        sequence.push(r);
        let prev = best;
        best = best.min(r);
        b = sq.scale_real(1.0 / nb);
        if (prev - r).abs() <= cfg.norm_tol * prev {
            return Ok(SpectralRadius {
                verdict: RadiusVerdict::Estimate(best),
                sequence,
                converged: true,
            });
        }
    }
    Ok(SpectralRadius {
        verdict: RadiusVerdict::Estimate(best),
        sequence,
        converged: false,
    })
}
