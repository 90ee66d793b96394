//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
//! failure. Library results are checked against independent oracles where
//! one exists.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::process::{Command, ExitCode};

use common::{gauss_solve, kkt_min_norm, matrix_with_spectrum_near, sigma_max};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use simlab::car::{
    car_generators, foguel_nearness, gamma_n_identity_check, intertwining_residual, weighted_hankel,
    weighted_hankel_bound_check, HankelSpec,
};
use simlab::linalg::random::{random_complex_matrix, random_complex_vector, random_contraction, random_unitary};
use simlab::nearness::{
    block_projection, build_renorm_model, near_gram, near_row, parallelogram_check, renorm_contraction_check,
};
use simlab::operator::{
    left_inverse_of_weighted_shift, power_profile, truncated_shift, weighted_shift, BetaSequence, BlockUpper,
    WindowedOperator,
};
use simlab::perturbation::{gallery_entry, verify_sum_identity, MatrixPolynomial};
use simlab::sylvester::{
    certify_similarity, commutator, decompose_coisometry_case, decompose_isometry_case, decompose_weighted_case,
    partial_sum_solution, solve_sylvester_direct, SumMode,
};
use simlab::{ComplexMatrix, ToleranceConfig};

type Outcome = Result<String, String>;

fn cfg() -> ToleranceConfig {
    ToleranceConfig::default()
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn e<E: std::fmt::Display>(err: E) -> String {
    err.to_string()
}

fn finite(t: ComplexMatrix) -> WindowedOperator {
    WindowedOperator::finite(t).expect("square")
}

/// Oracle residual `sigma_max(TZ - ZV - X)`.
fn oracle_residual(t: &ComplexMatrix, v: &ComplexMatrix, x: &ComplexMatrix, z: &ComplexMatrix) -> f64 {
    sigma_max(&(&commutator(t, v, z) - x))
}

fn sylvester_round_trip() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let (mut solve, mut conj) = (0.0f64, 0.0f64);
    for i in 0..200 {
        let k = rng.random_range(1..=10);
        let h = rng.random_range(1..=10);
        // Spectra in disjoint discs around +1.5 and -1.5.
        let (t, _) = matrix_with_spectrum_near(&mut rng, k, 1.5, 0.5);
        let (v, _) = matrix_with_spectrum_near(&mut rng, h, -1.5, 0.5);
        let x = random_complex_matrix(&mut rng, k, h);
        let sol = solve_sylvester_direct(&t, &v, &x, &cfg()).map_err(e)?;
        let r = sol.residual.max(oracle_residual(&t, &v, &x, &sol.z));
        let b = BlockUpper::new(finite(t), x, finite(v)).map_err(e)?;
        let cert = certify_similarity(&b, &sol.z, &cfg()).map_err(|err| format!("instance {i}: {err}"))?;
        ensure(r < 1e-9 && cert.conjugation_residual < 1e-9, || {
            format!("instance {i}: solve {r:e}, conjugation {:e}", cert.conjugation_residual)
        })?;
        solve = solve.max(r);
        conj = conj.max(cert.conjugation_residual);
    }
    Ok(format!(
        "200 instances; max solve residual {solve:.1e}, max conjugation residual {conj:.1e}"
    ))
}

fn telescoping() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    let v = truncated_shift(1, 16).map_err(e)?.with_guard(12).map_err(e)?;
    let vm = v.matrix();
    let vstar = vm.adjoint();
    let vv = vm.matmul(&vstar);
    let (mut ident, mut recover) = (0.0f64, 0.0f64);
    for i in 0..20 {
        let k = rng.random_range(1..=5);
        let t = random_contraction(&mut rng, k, 0.95);
        let d = random_complex_matrix(&mut rng, k, 16).matmul(&vv);
        let x = commutator(&t, vm, &d);
        let mut sum = ComplexMatrix::zeros(k, 16);
        for n in 0..=10 {
            sum = &sum + &t.pow(n).matmul(&x).matmul(&vstar.pow(n + 1));
            let rhs = &t.pow(n + 1).matmul(&d).matmul(&vstar.pow(n + 1)) - &d;
            ident = ident.max(sigma_max(&(&sum - &rhs)));
        }
        // V^{*16} = 0, so the partial sum at n = 15 equals -(-D) exactly up to rounding.
        let sol = partial_sum_solution(&t, vm, &x, 15, SumMode::Plain, &cfg()).map_err(e)?;
        recover = recover.max((&sol.z - &d).max_abs());
        ensure(ident < 1e-11 && recover < 1e-8, || {
            format!("instance {i}: identity {ident:e}, recovery {recover:e}")
        })?;
    }
    Ok(format!(
        "20 instances, n <= 10; max identity residual {ident:.1e}, max recovery error {recover:.1e}"
    ))
}

/// `Q diag(e^{i theta}) Q^*` with its eigenvalues.
fn unitary_with_spectrum(rng: &mut ChaCha8Rng, h: usize) -> (ComplexMatrix, Vec<Complex64>, ComplexMatrix) {
    let q = random_unitary(rng, h);
    let eig: Vec<Complex64> = (0..h)
        .map(|_| Complex64::from_polar(1.0, rng.random_range(-PI..PI)))
        .collect();
    (q.matmul(&ComplexMatrix::diag(&eig)).matmul(&q.adjoint()), eig, q)
}

/// Midpoint of the widest gap between the angles of `eig`.
fn widest_gap_point(eig: &[Complex64]) -> Complex64 {
    let mut angles: Vec<f64> = eig.iter().map(|z| z.arg()).collect();
    angles.sort_by(f64::total_cmp);
    let mut best = (
        angles[0] + 2.0 * PI - angles[angles.len() - 1],
        angles[angles.len() - 1],
    );
    for w in angles.windows(2) {
        if w[1] - w[0] > best.0 {
            best = (w[1] - w[0], w[0]);
        }
    }
    Complex64::from_polar(1.0, best.1 + best.0 / 2.0)
}

/// A certificate is obtained if the plain partial sum or the direct solver
/// yields a `Z` that `certify_similarity` accepts.
fn certificate_obtained(b: &BlockUpper) -> bool {
    let (t, v) = (b.t.matrix(), b.v.matrix());
    let mut candidates = Vec::new();
    if let Ok(s) = partial_sum_solution(t, v, &b.x, 128, SumMode::Plain, &cfg()) {
        candidates.push(s.z);
    }
    if let Ok(s) = solve_sylvester_direct(t, v, &b.x, &cfg()) {
        candidates.push(s.z);
    }
    candidates.iter().any(|z| certify_similarity(b, z, &cfg()).is_ok())
}

fn unitary_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    let mut tally = [(0usize, 0usize); 3];
    for i in 0..50 {
        let class = i % 3;
        let h = rng.random_range(1..=8);
        let k = rng.random_range(2..=6);
        let (v, eig, q) = unitary_with_spectrum(&mut rng, h);
        let mut x = random_complex_matrix(&mut rng, k, h);
        let t = match class {
            // Strict contraction.
            0 => {
                let r = rng.random_range(0.1..0.7);
                random_contraction(&mut rng, k, r)
            }
            // Shares a unimodular eigenvalue with V, coupled through X.
            1 | 2 => {
                let w = random_unitary(&mut rng, k);
                let mut d: Vec<Complex64> = (0..k)
                    .map(|_| Complex64::from_polar(rng.random_range(0.0..0.6), rng.random_range(-PI..PI)))
                    .collect();
                d[0] = if class == 1 { eig[0] } else { widest_gap_point(&eig) };
                if class == 1 {
                    let u0 = ComplexMatrix::column_vector(&w.column(0));
                    let v0 = ComplexMatrix::column_vector(&q.column(0));
                    x = &x + &u0.matmul(&v0.adjoint()).scale_real(2.0);
                }
                w.matmul(&ComplexMatrix::diag(&d)).matmul(&w.adjoint())
            }
            _ => unreachable!(),
        };
        let b = BlockUpper::new(finite(t), x, finite(v)).map_err(e)?;
        let profile = power_profile(&b.assemble(), 64, &cfg()).map_err(e)?;
        let bounded = profile.growth.is_bounded();
        let certified = certificate_obtained(&b);
        ensure(bounded == certified, || {
            format!(
                "instance {i} (class {class}): bounded = {bounded}, certified = {certified}, growth {:?}",
                profile.growth
            )
        })?;
        ensure(bounded == (class != 1), || {
            format!("instance {i} (class {class}): unexpected verdict {bounded}")
        })?;
        tally[class].0 += 1;
        tally[class].1 += bounded as usize;
    }
    Ok(format!(
        "50 instances, no counterexample; contraction T {}/{} bounded+certified, shared unimodular eigenvalue {}/{} bounded, separated unimodular eigenvalue {}/{} bounded+certified",
        tally[0].1, tally[0].0, tally[1].1, tally[1].0, tally[2].1, tally[2].0
    ))
}

fn decompositions() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(104);
    let mut worst = [0.0f64; 3];
    for i in 0..100 {
        // T a coisometry: either unitary or the adjoint of a truncated shift.
        let (t, v) = {
            let v = {
                let r = rng.random_range(1..=4);
                random_contraction(&mut rng, r, 1.0)
            };
            let t = if i % 2 == 0 {
                {
                    let r = rng.random_range(1..=6);
                    random_unitary(&mut rng, r)
                }
            } else {
                truncated_shift(rng.random_range(1..=2), rng.random_range(2..=6))
                    .map_err(e)?
                    .matrix()
                    .adjoint()
            };
            (t, v)
        };
        let z = random_complex_matrix(&mut rng, t.rows(), v.rows());
        let x = commutator(&t, &v, &z);
        let d = decompose_coisometry_case(&t, &v, &x, &z, &cfg()).map_err(e)?;
        worst[0] = worst[0].max(d.residuals.max());

        // V an isometry: unitary or a truncated shift.
        let t = {
            let r = rng.random_range(1..=5);
            random_contraction(&mut rng, r, 1.0)
        };
        let v = if i % 2 == 0 {
            {
                let r = rng.random_range(1..=5);
                random_unitary(&mut rng, r)
            }
        } else {
            truncated_shift(rng.random_range(1..=2), rng.random_range(2..=6))
                .map_err(e)?
                .matrix()
                .clone()
        };
        let z = random_complex_matrix(&mut rng, t.rows(), v.rows());
        let x = commutator(&t, &v, &z);
        let d = decompose_isometry_case(&t, &v, &x, &z, &cfg()).map_err(e)?;
        worst[1] = worst[1].max(d.residuals.max());

        // V a weighted shift with its left inverse.
        let blocks = rng.random_range(2..=7);
        let weights: Vec<f64> = (0..blocks - 1).map(|_| rng.random_range(0.5..2.0)).collect();
        let s = weighted_shift(
            &BetaSequence::from_weights(weights).map_err(e)?,
            rng.random_range(1..=2),
            blocks,
        )
        .map_err(e)?;
        let l = left_inverse_of_weighted_shift(&s).map_err(e)?;
        let t = {
            let r = rng.random_range(1..=4);
            random_contraction(&mut rng, r, 1.0)
        };
        let z = random_complex_matrix(&mut rng, t.rows(), s.dim());
        let x = commutator(&t, s.matrix(), &z);
        let d = decompose_weighted_case(&t, s.matrix(), l.matrix(), &x, &z, &cfg()).map_err(e)?;
        worst[2] = worst[2].max(d.residuals.max());
        ensure(worst.iter().all(|&w| w < 1e-11), || {
            format!("instance {i}: residuals {worst:?}")
        })?;
    }
    Ok(format!(
        "100 instances per case; max residual coisometry {:.1e}, isometry {:.1e}, weighted {:.1e}",
        worst[0], worst[1], worst[2]
    ))
}

/// `(C, E)` with `EC = 0`: `E` annihilates the range of `C`.
fn zero_product_pair(rng: &mut ChaCha8Rng, m: usize) -> (ComplexMatrix, ComplexMatrix) {
    let rank = rng.random_range(1..m);
    let b = random_complex_matrix(rng, m, rank);
    let c = b.matmul(&random_complex_matrix(rng, rank, m));
    // proj = B (B^*B)^{-1} B^*, column by column through the oracle solver.
    let bb = b.adjoint().matmul(&b);
    let bstar = b.adjoint();
    let mut proj = ComplexMatrix::zeros(m, m);
    for col in 0..m {
        let y = gauss_solve(&bb, &bstar.column(col));
        for (i, z) in b.matvec(&y).into_iter().enumerate() {
            proj[(i, col)] = z;
        }
    }
    let e = random_complex_matrix(rng, m, m).matmul(&(&ComplexMatrix::identity(m) - &proj));
    (c.scale_real(1.0 / sigma_max(&c)), e.scale_real(1.0 / sigma_max(&e)))
}

fn sum_expansion() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(105);
    let mut worst = 0.0f64;
    for i in 0..100 {
        let m = rng.random_range(2..=8);
        let p = rng.random_range(1..=3);
        let d = rng.random_range(0..=8);
        let (c, e_) = zero_product_pair(&mut rng, m);
        let coeffs = (0..=d)
            .map(|_| random_complex_matrix(&mut rng, p, p).scale_real(0.5))
            .collect();
        let poly = MatrixPolynomial::new(coeffs).map_err(e)?;
        let r = verify_sum_identity(&poly, &c, &e_, &cfg()).map_err(e)?;
        ensure(r.precondition_holds && r.residual < 1e-10, || {
            format!("instance {i}: residual {:e}, EC {:e}", r.residual, r.ec_norm)
        })?;
        worst = worst.max(r.residual);
    }
    Ok(format!(
        "100 instances (p <= 3, d <= 8, dims <= 8); max residual {worst:.1e}"
    ))
}

fn jordan_gallery() -> Outcome {
    let entry = gallery_entry("remark35", &cfg()).map_err(e)?;
    let profile = power_profile(&entry.t, 64, &cfg()).map_err(e)?;
    for n in 1..=64 {
        let v = profile.norms[n];
        let nf = n as f64;
        ensure(nf <= v && v <= nf + 2.0, || format!("n = {n}: ||T^n|| = {v}"))?;
    }
    Ok(format!(
        "n <= ||T^n|| <= n + 2 for 1 <= n <= 64; ||T^64|| = {:.6}",
        profile.norms[64]
    ))
}

fn gram_row_agreement() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(107);
    let mut worst = 0.0f64;
    for i in 0..100 {
        let dim = rng.random_range(1..=8);
        let big_n = rng.random_range(1..=12);
        let t = {
            let r = rng.random_range(0.5..1.2);
            random_contraction(&mut rng, dim, r)
        };
        let c = {
            let r = rng.random_range(0.5..1.2);
            random_contraction(&mut rng, dim, r)
        };
        let beta = if i % 2 == 0 {
            BetaSequence::ones(big_n + 1)
        } else {
            BetaSequence::from_weights((0..big_n).map(|_| rng.random_range(0.5..1.5)).collect()).map_err(e)?
        };
        let g = near_gram(&t, &c, &beta, big_n, None, &cfg()).map_err(e)?;
        let r = near_row(&t, &c, &beta, big_n, None, &cfg()).map_err(e)?;
        for (a, b) in g.per_n.iter().zip(&r.per_n) {
            let diff = (a - b).abs() / a.max(1.0);
            worst = worst.max(diff);
            ensure(diff < 1e-8, || format!("instance {i}: gram {a} vs row {b}"))?;
        }
    }
    Ok(format!(
        "100 instances (half beta = 1, half random beta); max scaled difference {worst:.1e}"
    ))
}

fn shift_nearness_constants() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(108);
    let mut worst = 0.0f64;
    for i in 0..20 {
        let block = rng.random_range(1..=2);
        let blocks = rng.random_range(3..=10);
        let weights: Vec<f64> = (0..blocks - 1).map(|_| rng.random_range(0.3..3.0)).collect();
        let beta = BetaSequence::from_weights(weights).map_err(e)?;
        let shifts = [
            (weighted_shift(&beta, block, blocks).map_err(e)?, beta.clone()),
            (truncated_shift(block, blocks).map_err(e)?, BetaSequence::ones(blocks)),
        ];
        // Modulo the first block, the kernel of the adjoint.
        let p0 = block_projection(block, blocks, 0);
        let zero = ComplexMatrix::zeros(block * blocks, block * blocks);
        for (s, b) in &shifts {
            let curve = near_row(s.matrix(), &zero, b, blocks - 1, Some(&p0), &cfg()).map_err(e)?;
            for v in &curve.per_n {
                worst = worst.max((v - 1.0).abs());
            }
            ensure(worst < 1e-10, || format!("instance {i}: curve {:?}", curve.per_n))?;
        }
    }
    Ok(format!(
        "20 weighted and 20 unweighted shifts; every per-N value within {worst:.1e} of 1"
    ))
}

fn renorm_construction() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(109);
    let norm2 = |v: &[Complex64]| v.iter().map(|z| z.norm_sqr()).sum::<f64>();
    let (mut kkt, mut para) = (0.0f64, 0.0f64);
    for i in 0..100 {
        let k = rng.random_range(1..=4);
        let blocks = rng.random_range(2..=6);
        let depth = rng.random_range(0..=5);
        let weights: Vec<f64> = (0..blocks - 1).map(|_| rng.random_range(0.5..1.5)).collect();
        let beta = BetaSequence::from_weights(weights).map_err(e)?;
        let s = weighted_shift(&beta, 1, blocks).map_err(e)?;
        let t = {
            let r = rng.random_range(0.5..1.2);
            random_contraction(&mut rng, k, r)
        };
        let x = random_complex_matrix(&mut rng, k, blocks);
        let model = build_renorm_model(&t, &x, &s, depth, &cfg()).map_err(e)?;
        let kv = random_complex_vector(&mut rng, k);
        let hv = random_complex_vector(&mut rng, blocks);
        let got = model.value(&kv, &hv).map_err(e)?.value;

        // c = k - sum_n X_n E_0 h_n / beta(n), with X_n from its definition.
        let mut c = kv.clone();
        for n in 0..blocks {
            let mut xn = ComplexMatrix::zeros(k, blocks);
            for j in 0..n {
                xn = &xn + &t.pow(j).matmul(&x).matmul(&s.matrix().pow(n - j - 1));
            }
            for r in 0..k {
                c[r] -= xn[(r, 0)] * hv[n] / beta.beta(n);
            }
        }
        let powers: Vec<ComplexMatrix> = (0..=depth).map(|j| t.pow(j)).collect();
        let (_, inv) = kkt_min_norm(&ComplexMatrix::hstack(&powers.iter().collect::<Vec<_>>()), &c);
        let oracle = norm2(&c) + norm2(&hv) + inv;
        let diff = (got - oracle).abs() / oracle.max(1.0);
        kkt = kkt.max(diff);
        ensure(diff < 1e-9, || format!("instance {i}: {got} vs oracle {oracle}"))?;

        let p = parallelogram_check(&model, 5, i as u64).map_err(e)?;
        para = para.max(p);
        ensure(p < 1e-9, || format!("instance {i}: parallelogram residual {p:e}"))?;
    }

    let mut excess = f64::NEG_INFINITY;
    let mut samples = 0;
    for i in 0..10 {
        let k = rng.random_range(1..=4);
        let blocks = rng.random_range(3..=8);
        let weights: Vec<f64> = (0..blocks - 1).map(|_| rng.random_range(0.3..1.0)).collect();
        let s = weighted_shift(&BetaSequence::from_weights(weights).map_err(e)?, 1, blocks).map_err(e)?;
        let t = {
            let r = rng.random_range(0.3..1.0);
            random_contraction(&mut rng, k, r)
        };
        let z = random_complex_matrix(&mut rng, k, blocks);
        let x = commutator(&t, s.matrix(), &z);
        let model = build_renorm_model(&t, &x, &s, rng.random_range(1..=6), &cfg()).map_err(e)?;
        let r =
            renorm_contraction_check(&model, 200, 1000 + i, &cfg()).map_err(|err| format!("instance {i}: {err}"))?;
        excess = excess.max(r.max_proof_excess.max(r.max_closed_form_excess));
        samples += r.samples;
    }
    Ok(format!(
        "KKT oracle on 100 instances (max scaled difference {kkt:.1e}); parallelogram max {para:.1e}; contraction on 10 x 200 = {samples} interior samples (max excess {excess:.1e})"
    ))
}

fn car_and_hankel() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(110);
    let mut anti = 0.0f64;
    for m in 1..=6 {
        let r = car_generators(m).map_err(e)?.relation_residuals();
        anti = anti.max(r.anticommutator.max(r.mixed));
    }
    ensure(anti <= 1e-14, || format!("anticommutation residual {anti:e}"))?;

    let (mut inter, mut gamma, mut bound_gap, mut near_gap) = (0.0f64, 0.0f64, f64::INFINITY, f64::INFINITY);
    for i in 0..50 {
        let support = rng.random_range(1..=4);
        let alpha: Vec<Complex64> = (0..support)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let modes = rng.random_range(support..=support.max(4));
        let blocks = rng.random_range(support.max(2)..=6);
        let spec = HankelSpec::new(alpha.clone(), blocks, modes).map_err(e)?;
        inter = inter.max(intertwining_residual(&spec, &cfg()).map_err(e)?);
        for r in gamma_n_identity_check(&spec, blocks - 1, &cfg()).map_err(e)? {
            gamma = gamma.max(r);
        }
        // B(a) from its definition; the weighted Hankel norm from the Jacobi oracle.
        let b: f64 = alpha
            .iter()
            .enumerate()
            .map(|(k, a)| ((k + 1) * (k + 1)) as f64 * a.norm_sqr())
            .sum();
        let bound = b.sqrt();
        let norm = sigma_max(&weighted_hankel(&spec).map_err(e)?);
        let lib = weighted_hankel_bound_check(&spec, &cfg()).map_err(e)?;
        ensure(lib.holds && (lib.bound - bound).abs() < 1e-12, || {
            format!("instance {i}: {lib:?}")
        })?;
        let near = foguel_nearness(&spec, &cfg()).map_err(e)?.value;
        ensure(norm <= bound + 1e-8 && near <= bound + 1e-8, || {
            format!("instance {i}: hankel {norm}, nearness {near}, bound {bound}")
        })?;
        bound_gap = bound_gap.min(bound - norm);
        near_gap = near_gap.min(bound - near);
    }
    ensure(inter < 1e-12 && gamma < 1e-12, || {
        format!("intertwining {inter:e}, Gamma_n identity {gamma:e}")
    })?;
    Ok(format!(
        "CAR residual {anti:.1e} (m <= 6); intertwining {inter:.1e}, Gamma_n identity {gamma:.1e}; 50 random alpha: min B^(1/2) - ||hankel|| = {bound_gap:.2e}, min B^(1/2) - nearness = {near_gap:.2e}"
    ))
}

fn determinism() -> Outcome {
    let spec = Path::new(env!("CARGO_MANIFEST_DIR")).join("specs/suite.json");
    let base = std::env::temp_dir().join(format!("simlab-acceptance-{}", std::process::id()));
    let mut outputs = Vec::new();
    for run in 0..2 {
        let dir = base.join(format!("run{run}"));
        let _ = fs::remove_dir_all(&dir);
        let out = Command::new(env!("CARGO_BIN_EXE_simlab"))
            .args(["run", "--spec"])
            .arg(&spec)
            .arg("--out")
            .arg(&dir)
            .output()
            .map_err(e)?;
        ensure(out.status.success(), || {
            format!("run {run} failed: {}", String::from_utf8_lossy(&out.stderr))
        })?;
        let mut files: Vec<_> = fs::read_dir(&dir).map_err(e)?.map(|f| f.unwrap().path()).collect();
        files.sort();
        let contents: Vec<(String, Vec<u8>)> = files
            .iter()
            .map(|p| {
                (
                    p.file_name().unwrap().to_string_lossy().into_owned(),
                    fs::read(p).unwrap(),
                )
            })
            .collect();
        outputs.push((out.stdout, contents));
    }
    let _ = fs::remove_dir_all(&base);
    let (a, b) = (&outputs[0], &outputs[1]);
    ensure(a.0 == b.0, || "stdout differs".into())?;
    ensure(a.1 == b.1, || "report files differ".into())?;
    let bytes: usize = a.1.iter().map(|(_, c)| c.len()).sum();
    Ok(format!(
        "two full-suite runs: {} files, {bytes} bytes, byte-identical",
        a.1.len()
    ))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("Sylvester round trip", sylvester_round_trip),
        ("telescoping partial sums on a truncated shift", telescoping),
        ("unitary V: bounded powers iff certificate", unitary_equivalence),
        ("decompositions X = A + F", decompositions),
        ("zero-product sum expansion", sum_expansion),
        ("Jordan gallery power growth", jordan_gallery),
        ("Gram and row nearness agree", gram_row_agreement),
        ("shift nearness constants equal 1", shift_nearness_constants),
        ("renorm construction", renorm_construction),
        ("CAR relations and Hankel bounds", car_and_hankel),
        ("CLI determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
