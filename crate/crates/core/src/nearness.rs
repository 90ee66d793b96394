//! Weighted quadratic nearness of `T` to `C`, in Gram form
//! `sup_N ||sum_n (T^n - C^n)(T^n - C^n)^* / beta(n)^2||^{1/2}` and in row form
//! `||[(T^n - C^n) P_0 / beta(n)]_n||`, plus the equivalent hilbertian norm on
//! `K (+) l^2(H)` that turns `R(X) = [[T, X], [0, S_w]]` into a contraction.
//!
//! The `n = 0` term `T^0 - C^0` always vanishes, so curves are indexed from
//! `N = 1`.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::random::random_complex_vector;
use crate::linalg::{inner, operator_norm, vector_norm, Cholesky, ComplexMatrix, ToleranceConfig, ZERO};
use crate::operator::{shift_weights, Ambient, BetaSequence, WindowedOperator};

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct NearnessCurve {
    /// Maximum over the window.
    pub value: f64,
    /// `per_n[i]` is the value for `N = i + 1`.
    pub per_n: Vec<f64>,
}

fn check_pair(t: &ComplexMatrix, c: &ComplexMatrix, beta: &BetaSequence, n: usize) -> Result<()> {
    if !t.is_square() {
        return Err(Error::NotSquare {
            context: "nearness",
            rows: t.rows(),
            cols: t.cols(),
        });
    }
    if c.shape() != t.shape() {
        return Err(Error::DimensionMismatch {
            context: "nearness",
            expected: t.shape(),
            actual: c.shape(),
        });
    }
    if beta.len() < n + 1 {
        return Err(Error::InvalidParameter {
            name: "beta",
            reason: format!("{} values cannot cover N = {n}", beta.len()),
        });
    }
    Ok(())
}

/// Checks `P^2 = P = P^*` within `identity_tol`.
pub fn check_projection(p: &ComplexMatrix, dim: usize, cfg: &ToleranceConfig) -> Result<()> {
    if p.shape() != (dim, dim) {
        return Err(Error::DimensionMismatch {
            context: "projection",
            expected: (dim, dim),
            actual: p.shape(),
        });
    }
    let idem = (&p.matmul(p) - p).max_abs();
    let herm = (&p.adjoint() - p).max_abs();
    let residual = idem.max(herm);
    if residual > cfg.identity_tol {
        return Err(Error::NotProjection {
            what: "subspace projection",
            residual,
        });
    }
    Ok(())
}

/// Orthogonal projection onto block `which` of `blocks` blocks of size `block`.
pub fn block_projection(block: usize, blocks: usize, which: usize) -> ComplexMatrix {
    let mut p = ComplexMatrix::zeros(block * blocks, block * blocks);
    for i in which * block..(which + 1) * block {
        p[(i, i)] = Complex64::new(1.0, 0.0);
    }
    p
}

/// `(T^n - C^n) / beta(n)` for `n = 1..=big_n`.
fn weighted_differences(t: &ComplexMatrix, c: &ComplexMatrix, beta: &BetaSequence, big_n: usize) -> Vec<ComplexMatrix> {
    let mut tn = ComplexMatrix::identity(t.rows());
    let mut cn = ComplexMatrix::identity(t.rows());
    (1..=big_n)
        .map(|n| {
            tn = tn.matmul(t);
            cn = cn.matmul(c);
            (&tn - &cn).scale_real(1.0 / beta.beta(n))
        })
        .collect()
}

fn curve(per_n: Vec<f64>) -> NearnessCurve {
    let value = per_n.iter().fold(0.0, |m: f64, &v| m.max(v));
    NearnessCurve { value, per_n }
}

/// Gram form; with `p0` the differences are compressed as `D P_0 D^*`.
pub fn near_gram(
    t: &ComplexMatrix,
    c: &ComplexMatrix,
    beta: &BetaSequence,
    big_n: usize,
    p0: Option<&ComplexMatrix>,
    cfg: &ToleranceConfig,
) -> Result<NearnessCurve> {
    check_pair(t, c, beta, big_n)?;
    if let Some(p) = p0 {
        check_projection(p, t.rows(), cfg)?;
    }
    let mut gram = ComplexMatrix::zeros(t.rows(), t.rows());
    let mut per_n = Vec::with_capacity(big_n);
    for d in weighted_differences(t, c, beta, big_n) {
        let d = match p0 {
            Some(p) => d.matmul(p),
            None => d,
        };
        gram = &gram + &d.matmul(&d.adjoint());
        per_n.push(operator_norm(&gram, cfg)?.sqrt());
    }
    Ok(curve(per_n))
}

/// Row form `||[(T^n - C^n) P_0 / beta(n)]_{n<=N}||`.
pub fn near_row(
    t: &ComplexMatrix,
    c: &ComplexMatrix,
    beta: &BetaSequence,
    big_n: usize,
    p0: Option<&ComplexMatrix>,
    cfg: &ToleranceConfig,
) -> Result<NearnessCurve> {
    check_pair(t, c, beta, big_n)?;
    if let Some(p) = p0 {
        check_projection(p, t.rows(), cfg)?;
    }
    let blocks: Vec<ComplexMatrix> = weighted_differences(t, c, beta, big_n)
        .into_iter()
        .map(|d| match p0 {
            Some(p) => d.matmul(p),
            None => d,
        })
        .collect();
    let mut per_n = Vec::with_capacity(big_n);
    for n in 1..=big_n {
        let parts: Vec<&ComplexMatrix> = blocks[..n].iter().collect();
        per_n.push(operator_norm(&ComplexMatrix::hstack(&parts), cfg)?);
    }
    Ok(curve(per_n))
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct NearnessReport {
    pub gram: NearnessCurve,
    pub row: NearnessCurve,
    pub difference: f64,
    pub agrees: bool,
    pub projected: bool,
}

/// Both forms side by side; they must agree within `2 norm_tol` (relative).
pub fn near_modulo_equivalence_check(
    t: &ComplexMatrix,
    c: &ComplexMatrix,
    beta: &BetaSequence,
    p0: Option<&ComplexMatrix>,
    big_n: usize,
    cfg: &ToleranceConfig,
) -> Result<NearnessReport> {
    let gram = near_gram(t, c, beta, big_n, p0, cfg)?;
    let row = near_row(t, c, beta, big_n, p0, cfg)?;
    let difference = (gram.value - row.value).abs();
    let agrees = difference <= 2.0 * cfg.norm_tol * gram.value.max(1.0);
    Ok(NearnessReport {
        gram,
        row,
        difference,
        agrees,
        projected: p0.is_some(),
    })
}

/// Largest `sup beta(n+k)/beta(n)` accepted as power bounded on a window.
pub const POWER_BOUND_CAP: f64 = 1e8;

/// Quadratic-form realization of the renormed space for
/// `R(X) = [[T, X], [0, S_w]]`:
/// `|(k, h)|^2 = ||c||^2 + ||h||^2 + <G_M^{-1} c, c>` with
/// `c = k - sum_n X_n h_n / beta(n)` and `G_M = sum_{n<=M} T^n T^{*n}`.
#[derive(Debug, Clone)]
pub struct RenormModel {
    t: ComplexMatrix,
    x: ComplexMatrix,
    s: ComplexMatrix,
    beta: BetaSequence,
    block: usize,
    blocks: usize,
    depth: usize,
    /// `X_n = sum_{j<n} T^j X S_w^{n-j-1}` for `n = 0..=blocks`.
    xs: Vec<ComplexMatrix>,
    gram: ComplexMatrix,
    chol: Cholesky,
    /// Factor of `G_{M+1}`, for images under `R(X)`.
    chol_next: Cholesky,
    /// Row norm `||[X_n E_0 / beta(n)]_{n<blocks}||`.
    pub nearness_constant: f64,
    /// `max_n ||X_{n+1} - T X_n - X S_w^n||`.
    pub recurrence_residual: f64,
    pub t_norm: f64,
    pub s_norm: f64,
}

pub fn build_renorm_model(
    t: &ComplexMatrix,
    x: &ComplexMatrix,
    s: &WindowedOperator,
    depth: usize,
    cfg: &ToleranceConfig,
) -> Result<RenormModel> {
    let Ambient::Truncated { block, blocks } = s.ambient() else {
        return Err(Error::InvalidParameter {
            name: "s",
            reason: "expected a weighted shift on a truncated window".into(),
        });
    };
    let beta = BetaSequence::from_weights(shift_weights(s)?)?;
    let ratio = beta.sup_ratio();
    if !(ratio <= POWER_BOUND_CAP) {
        return Err(Error::NotPowerBounded {
            ratio,
            cap: POWER_BOUND_CAP,
        });
    }
    if !t.is_square() {
        return Err(Error::NotSquare {
            context: "build_renorm_model",
            rows: t.rows(),
            cols: t.cols(),
        });
    }
    if x.shape() != (t.rows(), s.dim()) {
        return Err(Error::DimensionMismatch {
            context: "build_renorm_model",
            expected: (t.rows(), s.dim()),
            actual: x.shape(),
        });
    }
    let sm = s.matrix();
    let k = t.rows();
    let spow = sm.powers(blocks);
    let tpow = t.powers(blocks.max(depth + 1));

    // Direct definition and recurrence, cross-checked.
    let mut xs = Vec::with_capacity(blocks + 1);
    for n in 0..=blocks {
        let mut acc = ComplexMatrix::zeros(k, sm.cols());
        for j in 0..n {
            acc = &acc + &tpow[j].matmul(x).matmul(&spow[n - j - 1]);
        }
        xs.push(acc);
    }
    let mut recurrence_residual = 0.0f64;
    for n in 0..blocks {
        let rec = &t.matmul(&xs[n]) + &x.matmul(&spow[n]);
        recurrence_residual = recurrence_residual.max((&xs[n + 1] - &rec).max_abs());
    }

    let mut gram = ComplexMatrix::zeros(k, k);
    for tn in &tpow[..=depth] {
        gram = &gram + &tn.matmul(&tn.adjoint());
    }
    let next = &gram + &tpow[depth + 1].matmul(&tpow[depth + 1].adjoint());
    let chol = Cholesky::new(&gram, cfg.solve_tol)?;
    let chol_next = Cholesky::new(&next, cfg.solve_tol)?;

    let row: Vec<ComplexMatrix> = (0..blocks)
        .map(|n| xs[n].block(0, 0, k, block).scale_real(1.0 / beta.beta(n)))
        .collect();
    let parts: Vec<&ComplexMatrix> = row.iter().collect();
    let nearness_constant = operator_norm(&ComplexMatrix::hstack(&parts), cfg)?;

    Ok(RenormModel {
        t: t.clone(),
        x: x.clone(),
        s: sm.clone(),
        beta,
        block,
        blocks,
        depth,
        xs,
        gram,
        chol,
        chol_next,
        nearness_constant,
        recurrence_residual,
        t_norm: operator_norm(t, cfg)?,
        s_norm: operator_norm(sm, cfg)?,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RenormValue {
    /// `|(k, h)|^2`.
    pub value: f64,
    /// `c = k - sum_n X_n h_n / beta(n)`.
    pub c: Vec<Complex64>,
    /// Minimizing `k_0, ..., k_M` with `sum_n T^n k_n = c`.
    pub kappa: Vec<Vec<Complex64>>,
    /// `<G_M^{-1} c, c> = sum_n ||k_n||^2`.
    pub inverse_form: f64,
}

fn norm_sqr(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

impl RenormModel {
    pub fn k_dim(&self) -> usize {
        self.t.rows()
    }

    pub fn h_dim(&self) -> usize {
        self.s.rows()
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn blocks(&self) -> usize {
        self.blocks
    }

    pub fn block(&self) -> usize {
        self.block
    }

    pub fn beta(&self) -> &BetaSequence {
        &self.beta
    }

    pub fn gram(&self) -> &ComplexMatrix {
        &self.gram
    }

    pub fn x_n(&self, n: usize) -> &ComplexMatrix {
        &self.xs[n]
    }

    pub fn t(&self) -> &ComplexMatrix {
        &self.t
    }

    pub fn x(&self) -> &ComplexMatrix {
        &self.x
    }

    pub fn s(&self) -> &ComplexMatrix {
        &self.s
    }

    fn check_vectors(&self, k: &[Complex64], h: &[Complex64]) -> Result<()> {
        if k.len() != self.k_dim() || h.len() != self.h_dim() {
            return Err(Error::DimensionMismatch {
                context: "renorm vector",
                expected: (self.k_dim(), self.h_dim()),
                actual: (k.len(), h.len()),
            });
        }
        Ok(())
    }

    /// `c = k - sum_n X_n h_n / beta(n)` where `h_n` is block `n` of `h`.
    pub fn residual_part(&self, k: &[Complex64], h: &[Complex64]) -> Vec<Complex64> {
        let mut c = k.to_vec();
        for n in 0..self.blocks {
            let hn = &h[n * self.block..(n + 1) * self.block];
            let xn = &self.xs[n];
            let w = 1.0 / self.beta.beta(n);
            for (i, ci) in c.iter_mut().enumerate() {
                let mut acc = ZERO;
                for (j, hj) in hn.iter().enumerate() {
                    acc += xn[(i, j)] * hj;
                }
                *ci -= acc * w;
            }
        }
        c
    }

    pub fn value(&self, k: &[Complex64], h: &[Complex64]) -> Result<RenormValue> {
        self.check_vectors(k, h)?;
        let c = self.residual_part(k, h);
        let y = self.chol.solve_vec(&c);
        let inverse_form = inner(&y, &c).re;
        let mut kappa = Vec::with_capacity(self.depth + 1);
        let ta = self.t.adjoint();
        let mut kn = y;
        for _ in 0..=self.depth {
            let next = ta.matvec(&kn);
            kappa.push(kn);
            kn = next;
        }
        Ok(RenormValue {
            value: norm_sqr(&c) + norm_sqr(h) + inverse_form,
            c,
            kappa,
            inverse_form,
        })
    }

    /// `<G_m^{-1} c, c>` for `m = 0..=depth`.
    pub fn depth_curve(&self, k: &[Complex64], h: &[Complex64], cfg: &ToleranceConfig) -> Result<Vec<f64>> {
        self.check_vectors(k, h)?;
        let c = self.residual_part(k, h);
        let mut gram = ComplexMatrix::zeros(self.k_dim(), self.k_dim());
        let mut tn = ComplexMatrix::identity(self.k_dim());
        let mut out = Vec::with_capacity(self.depth + 1);
        for _ in 0..=self.depth {
            gram = &gram + &tn.matmul(&tn.adjoint());
            tn = tn.matmul(&self.t);
            out.push(Cholesky::new(&gram, cfg.solve_tol)?.inverse_quadratic_form(&c));
        }
        Ok(out)
    }

    /// `R(X) (k, h) = (Tk + Xh, S_w h)`.
    pub fn apply_r(&self, k: &[Complex64], h: &[Complex64]) -> (Vec<Complex64>, Vec<Complex64>) {
        let mut k2 = self.t.matvec(k);
        for (a, b) in k2.iter_mut().zip(self.x.matvec(h)) {
            *a += b;
        }
        (k2, self.s.matvec(h))
    }
}

pub fn renorm_value(model: &RenormModel, k: &[Complex64], h: &[Complex64]) -> Result<RenormValue> {
    model.value(k, h)
}

fn sample_pair(model: &RenormModel, rng: &mut ChaCha8Rng) -> (Vec<Complex64>, Vec<Complex64>) {
    (
        random_complex_vector(rng, model.k_dim()),
        random_complex_vector(rng, model.h_dim()),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct EquivalenceConstants {
    /// Smallest sampled `|(k,h)|^2 / (||k||^2 + ||h||^2)`.
    pub c_lower: f64,
    pub c_upper: f64,
    /// `1 / max(2, 2C^2 + 1)` with `C` the model's nearness constant.
    pub envelope_lower: f64,
    /// `max(4, 4C^2 + 1)`.
    pub envelope_upper: f64,
    pub samples: usize,
}

pub fn renorm_equivalence(
    model: &RenormModel,
    samples: usize,
    seed: u64,
    cfg: &ToleranceConfig,
) -> Result<EquivalenceConstants> {
    let c2 = model.nearness_constant * model.nearness_constant;
    let envelope_lower = 1.0 / (2.0f64).max(2.0 * c2 + 1.0);
    let envelope_upper = (4.0f64).max(4.0 * c2 + 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c_lower = f64::INFINITY;
    let mut c_upper = 0.0f64;
    for _ in 0..samples {
        let (k, h) = sample_pair(model, &mut rng);
        let ratio = model.value(&k, &h)?.value / (norm_sqr(&k) + norm_sqr(&h));
        c_lower = c_lower.min(ratio);
        c_upper = c_upper.max(ratio);
    }
    let slack = cfg.identity_tol;
    if samples > 0 && (c_lower < envelope_lower * (1.0 - slack) || c_upper > envelope_upper * (1.0 + slack)) {
        return Err(Error::EnvelopeViolated {
            detail: format!(
                "sampled ratios [{c_lower:e}, {c_upper:e}] outside [{envelope_lower:e}, {envelope_upper:e}]"
            ),
        });
    }
    Ok(EquivalenceConstants {
        c_lower,
        c_upper,
        envelope_lower,
        envelope_upper,
        samples,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ContractionReport {
    pub samples: usize,
    /// `max (bound - |v|^2) / max(1, |v|^2)` using the shifted decomposition.
    pub max_proof_excess: f64,
    /// Same with the closed form of `|R(X)v|^2` at depth `M + 1`.
    pub max_closed_form_excess: f64,
}

/// Samples `v = (k, h)` with `h` vanishing on the last block and checks
/// `|R(X)v| <= |v|`.
pub fn renorm_contraction_check(
    model: &RenormModel,
    samples: usize,
    seed: u64,
    cfg: &ToleranceConfig,
) -> Result<ContractionReport> {
    let tol = cfg.norm_tol.max(cfg.identity_tol);
    if model.t_norm > 1.0 + tol {
        return Err(Error::NotContraction {
            what: "T",
            norm: model.t_norm,
        });
    }
    if model.s_norm > 1.0 + tol {
        return Err(Error::NotContraction {
            what: "S_w",
            norm: model.s_norm,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let last = (model.blocks - 1) * model.block;
    let mut report = ContractionReport {
        samples,
        max_proof_excess: f64::NEG_INFINITY,
        max_closed_form_excess: f64::NEG_INFINITY,
    };
    for sample in 0..samples {
        let (k, mut h) = sample_pair(model, &mut rng);
        h[last..].iter_mut().for_each(|z| *z = ZERO);
        let v = model.value(&k, &h)?;
        let (k2, h2) = model.apply_r(&k, &h);
        let tc = model.t.matvec(&v.c);
        let proof_bound = norm_sqr(&tc) + norm_sqr(&h2) + v.inverse_form;
        let c2 = model.residual_part(&k2, &h2);
        let closed = norm_sqr(&c2) + norm_sqr(&h2) + model.chol_next.inverse_quadratic_form(&c2);
        let scale = v.value.max(1.0);
        let proof_excess = (proof_bound - v.value) / scale;
        let closed_excess = (closed - v.value) / scale;
        report.max_proof_excess = report.max_proof_excess.max(proof_excess);
        report.max_closed_form_excess = report.max_closed_form_excess.max(closed_excess);
        if proof_excess > cfg.identity_tol || closed_excess > cfg.identity_tol {
            let mut witness = k;
            witness.extend(h);
            return Err(Error::ContractionViolated {
                sample,
                image: proof_bound.max(closed),
                value: v.value,
                witness,
            });
        }
    }
    Ok(report)
}

/// `max | |v+w|^2 + |v-w|^2 - 2|v|^2 - 2|w|^2 | / (|v|^2 + |w|^2)`.
pub fn parallelogram_check(model: &RenormModel, samples: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let (k1, h1) = sample_pair(model, &mut rng);
        let (k2, h2) = sample_pair(model, &mut rng);
        let add = |a: &[Complex64], b: &[Complex64], s: f64| -> Vec<Complex64> {
            a.iter().zip(b).map(|(x, y)| x + y * s).collect()
        };
        let v = model.value(&k1, &h1)?.value;
        let w = model.value(&k2, &h2)?.value;
        let plus = model.value(&add(&k1, &k2, 1.0), &add(&h1, &h2, 1.0))?.value;
        let minus = model.value(&add(&k1, &k2, -1.0), &add(&h1, &h2, -1.0))?.value;
        let r = (plus + minus - 2.0 * v - 2.0 * w).abs() / (v + w).max(f64::MIN_POSITIVE);
        worst = worst.max(r);
    }
    Ok(worst)
}

/// Plain `||v||` helper for report code.
pub fn euclidean_norm(k: &[Complex64], h: &[Complex64]) -> f64 {
    (vector_norm(k).powi(2) + vector_norm(h).powi(2)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::random::{random_complex_matrix, random_contraction};
    use crate::operator::{truncated_shift, weighted_shift};

    fn cfg() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    #[test]
    fn equal_operators_are_at_distance_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let t = random_contraction(&mut rng, 4, 0.9);
        let beta = BetaSequence::ones(6);
        let r = near_modulo_equivalence_check(&t, &t, &beta, None, 5, &cfg()).unwrap();
        assert_eq!(r.gram.value, 0.0);
        assert_eq!(r.row.value, 0.0);
    }

    #[test]
    fn shift_with_geometric_weights() {
        // beta(n) = 2^n, T = 2 S on the window, C = 0.
        let n = 6;
        let s = truncated_shift(1, n).unwrap();
        let t = s.matrix().scale_real(2.0);
        let beta = BetaSequence::from_weights(vec![2.0; n]).unwrap();
        let zero = ComplexMatrix::zeros(n, n);
        // Nested ranges: the Gram sum is diag(0, 1, ..., n - 1).
        let g = near_gram(&t, &zero, &beta, n - 1, None, &cfg()).unwrap();
        assert!((g.value - ((n - 1) as f64).sqrt()).abs() < 1e-12);
        // Modulo the first coordinate the ranges are orthogonal.
        let p0 = block_projection(1, n, 0);
        let g = near_gram(&t, &zero, &beta, n - 1, Some(&p0), &cfg()).unwrap();
        assert!((g.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gram_and_row_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let t = random_contraction(&mut rng, 5, 1.0);
        let c = random_contraction(&mut rng, 5, 1.0);
        let beta = BetaSequence::from_weights(vec![1.3, 0.8, 1.1, 0.9, 1.2, 1.0, 0.7, 1.5]).unwrap();
        let r = near_modulo_equivalence_check(&t, &c, &beta, None, 8, &cfg()).unwrap();
        assert!(r.agrees, "{r:?}");
        assert!(r.difference < 1e-9);
        for w in r.row.per_n.windows(2) {
            assert!(w[1] >= w[0] - 1e-12);
        }
    }

    #[test]
    fn weighted_shift_modulo_first_block_is_one() {
        let beta = BetaSequence::from_weights(vec![2.0, 0.5, 3.0, 1.5, 0.25]).unwrap();
        let s = weighted_shift(&beta, 2, 6).unwrap();
        let p0 = block_projection(2, 6, 0);
        let r = near_row(s.matrix(), &ComplexMatrix::zeros(12, 12), &beta, 5, Some(&p0), &cfg()).unwrap();
        for v in &r.per_n {
            assert!((v - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_non_projection() {
        let t = ComplexMatrix::identity(2);
        let p = ComplexMatrix::diag_real(&[0.5, 1.0]);
        let err = near_row(&t, &t, &BetaSequence::ones(3), 2, Some(&p), &cfg()).unwrap_err();
        assert!(matches!(err, Error::NotProjection { .. }));
    }

    fn model(t: ComplexMatrix, x: ComplexMatrix, s: &WindowedOperator, depth: usize) -> RenormModel {
        build_renorm_model(&t, &x, s, depth, &cfg()).unwrap()
    }

    #[test]
    fn zero_data_model() {
        let s = truncated_shift(1, 4).unwrap();
        let m = model(ComplexMatrix::zeros(2, 2), ComplexMatrix::zeros(2, 4), &s, 3);
        assert_eq!(m.nearness_constant, 0.0);
        assert_eq!(m.gram(), &ComplexMatrix::identity(2));
        let k = vec![Complex64::new(1.0, 1.0), Complex64::new(0.0, -2.0)];
        let h = vec![Complex64::new(0.5, 0.0); 4];
        let v = m.value(&k, &h).unwrap();
        assert!((v.value - (2.0 * norm_sqr(&k) + norm_sqr(&h))).abs() < 1e-12);
        let v = m.value(&[ZERO; 2], &h).unwrap();
        assert!((v.value - norm_sqr(&h)).abs() < 1e-12);
    }

    #[test]
    fn depth_zero_gram_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = truncated_shift(1, 4).unwrap();
        let m = model(
            random_contraction(&mut rng, 3, 0.9),
            random_complex_matrix(&mut rng, 3, 4),
            &s,
            0,
        );
        assert!((m.gram() - &ComplexMatrix::identity(3)).max_abs() < 1e-15);
    }

    #[test]
    fn recurrence_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let beta = BetaSequence::from_weights(vec![0.5, 0.9, 1.0, 0.8]).unwrap();
        let s = weighted_shift(&beta, 2, 5).unwrap();
        let m = model(
            random_contraction(&mut rng, 3, 0.9),
            random_complex_matrix(&mut rng, 3, 10),
            &s,
            4,
        );
        assert!(m.recurrence_residual < 1e-13);
    }

    #[test]
    fn value_decreases_with_depth() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let s = truncated_shift(1, 5).unwrap();
        let m = model(
            random_contraction(&mut rng, 3, 0.95),
            random_complex_matrix(&mut rng, 3, 5),
            &s,
            6,
        );
        let k = random_complex_vector(&mut rng, 3);
        let h = random_complex_vector(&mut rng, 5);
        let curve = m.depth_curve(&k, &h, &cfg()).unwrap();
        for w in curve.windows(2) {
            assert!(w[1] <= w[0] + 1e-12);
        }
        assert!((curve[6] - m.value(&k, &h).unwrap().inverse_form).abs() < 1e-10);
    }

    #[test]
    fn minimizer_satisfies_constraint() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let s = truncated_shift(1, 4).unwrap();
        let m = model(
            random_contraction(&mut rng, 3, 0.9),
            random_complex_matrix(&mut rng, 3, 4),
            &s,
            3,
        );
        let k = random_complex_vector(&mut rng, 3);
        let h = random_complex_vector(&mut rng, 4);
        let v = m.value(&k, &h).unwrap();
        let mut sum = vec![ZERO; 3];
        let mut tn = ComplexMatrix::identity(3);
        for kn in &v.kappa {
            for (a, b) in sum.iter_mut().zip(tn.matvec(kn)) {
                *a += b;
            }
            tn = tn.matmul(m.t());
        }
        for (a, b) in sum.iter().zip(&v.c) {
            assert!((a - b).norm() < 1e-12);
        }
        let kn2: f64 = v.kappa.iter().map(|kn| norm_sqr(kn)).sum();
        assert!((kn2 - v.inverse_form).abs() < 1e-12);
    }

    #[test]
    fn trivial_equivalence_constants() {
        let s = truncated_shift(1, 3).unwrap();
        let m = model(ComplexMatrix::zeros(2, 2), ComplexMatrix::zeros(2, 3), &s, 2);
        let e = renorm_equivalence(&m, 50, 7, &cfg()).unwrap();
        assert!(e.c_lower >= 1.0 - 1e-12 && e.c_upper <= 2.0 + 1e-12);
    }

    #[test]
    fn contraction_and_parallelogram() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let beta = BetaSequence::from_weights(vec![0.9, 1.0, 0.7, 1.0, 0.95]).unwrap();
        let s = weighted_shift(&beta, 1, 6).unwrap();
        let t = random_contraction(&mut rng, 3, 1.0);
        let x = random_complex_matrix(&mut rng, 3, 6);
        let m = model(t, x, &s, 6);
        let r = renorm_contraction_check(&m, 100, 9, &cfg()).unwrap();
        assert!(r.max_proof_excess <= 1e-10);
        assert!(parallelogram_check(&m, 50, 10).unwrap() < 1e-12);
    }

    #[test]
    fn unbounded_weights_refused() {
        let beta = BetaSequence::from_weights(vec![1e5, 1e5, 1.0]).unwrap();
        let s = weighted_shift(&beta, 1, 4).unwrap();
        let err =
            build_renorm_model(&ComplexMatrix::zeros(1, 1), &ComplexMatrix::zeros(1, 4), &s, 2, &cfg()).unwrap_err();
        assert!(matches!(err, Error::NotPowerBounded { .. }));
    }

    #[test]
    fn non_contractive_shift_rejected_by_contraction_check() {
        let beta = BetaSequence::from_weights(vec![2.0, 1.0, 1.0]).unwrap();
        let s = weighted_shift(&beta, 1, 4).unwrap();
        let m = model(ComplexMatrix::zeros(1, 1), ComplexMatrix::zeros(1, 4), &s, 2);
        assert!(matches!(
            renorm_contraction_check(&m, 5, 1, &cfg()),
            Err(Error::NotContraction { .. })
        ));
    }
}
