mod common;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use simlab::linalg::operator_norm;
use simlab::linalg::random::{random_complex_matrix, random_contraction, random_unitary};
use simlab::nearness::{block_projection, near_row};
use simlab::operator::{
    left_inverse_of_weighted_shift, power_profile, truncated_shift, weighted_shift, BetaSequence, BlockUpper,
    WindowedOperator,
};
use simlab::sylvester::{
    certify_similarity, commutator, decompose_isometry_case, decompose_weighted_case, growth_condition,
    partial_sum_solution, Side, SumMode,
};
use simlab::{ComplexMatrix, ToleranceConfig};

fn cfg() -> ToleranceConfig {
    ToleranceConfig::default()
}

#[test]
fn telescoping_on_truncated_shift() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let v = truncated_shift(2, 16).unwrap().with_guard(12).unwrap();
    let vm = v.matrix();
    let vstar = vm.adjoint();
    let vv = vm.matmul(&vstar);
    for _ in 0..5 {
        let t = random_contraction(&mut rng, 3, 0.95);
        let d = random_complex_matrix(&mut rng, 3, 32).matmul(&vv);
        let x = commutator(&t, vm, &d);
        let mut sum = ComplexMatrix::zeros(3, 32);
        for n in 0..=10 {
            sum = &sum + &t.pow(n).matmul(&x).matmul(&vstar.pow(n + 1));
            let rhs = &t.pow(n + 1).matmul(&d).matmul(&vstar.pow(n + 1)) - &d;
            assert!(operator_norm(&(&sum - &rhs), &cfg()).unwrap() < 1e-11);
        }
        let sol = partial_sum_solution(&t, vm, &x, 15, SumMode::Plain, &cfg()).unwrap();
        assert!((&sol.z - &d).max_abs() < 1e-8);
        assert!(sol.side_condition_residual.unwrap() < 1e-12);
    }
}

/// Power corners of `R(X; T, S)` with `X` living on the first block column
/// agree between `N` and `2N` blocks wherever the shift has not reached the
/// truncation edge.
#[test]
fn window_exactness_under_doubling() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let (block, n_small) = (2, 6);
    let t = random_contraction(&mut rng, 3, 0.9);
    let x0 = random_complex_matrix(&mut rng, 3, block);
    let corner = |blocks: usize, n: usize| {
        let s = truncated_shift(block, blocks).unwrap();
        let mut x = ComplexMatrix::zeros(3, block * blocks);
        x.set_block(0, 0, &x0);
        let b = BlockUpper::new(WindowedOperator::finite(t.clone()).unwrap(), x, s).unwrap();
        b.power_corner(n)
    };
    for n in 1..n_small {
        let small = corner(n_small, n);
        let big = corner(2 * n_small, n);
        assert_eq!(small, big.block(0, 0, 3, block * n_small));
    }
}

#[test]
fn isometry_case_end_to_end() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let v = truncated_shift(1, 8).unwrap();
    let vm = v.matrix();
    let vv = vm.matmul(&vm.adjoint());
    let t = random_contraction(&mut rng, 3, 0.9);
    let z = random_complex_matrix(&mut rng, 3, 8).matmul(&vv);
    let x = commutator(&t, vm, &z);
    let dec = decompose_isometry_case(&t, vm, &x, &z, &cfg()).unwrap();
    assert!(dec.residuals.max() < 1e-11, "{:?}", dec.residuals);
    let g = growth_condition(&t, vm, &x, 32, Side::Right, &cfg()).unwrap();
    assert!(g.bounded);
}

#[test]
fn weighted_case_end_to_end() {
    let mut rng = ChaCha8Rng::seed_from_u64(24);
    let blocks = 8;
    let weights: Vec<f64> = (0..blocks).map(|_| rng.random_range(0.6..1.0)).collect();
    let beta = BetaSequence::from_weights(weights).unwrap();
    let s = weighted_shift(&beta, 1, blocks).unwrap();
    let l = left_inverse_of_weighted_shift(&s).unwrap();
    let sl = s.matrix().matmul(l.matrix());
    let t = random_contraction(&mut rng, 3, 0.9);
    let z = random_complex_matrix(&mut rng, 3, blocks).matmul(&sl);
    let x = commutator(&t, s.matrix(), &z);
    let dec = decompose_weighted_case(&t, s.matrix(), l.matrix(), &x, &z, &cfg()).unwrap();
    assert!(dec.residuals.max() < 1e-11, "{:?}", dec.residuals);

    // R(A) is near R(0) modulo the first block of the second summand.
    let ra = dec.r_a(&t, s.matrix());
    let r0 = {
        let mut m = ComplexMatrix::zeros(3 + blocks, 3 + blocks);
        m.set_block(0, 0, &t);
        m.set_block(3, 3, s.matrix());
        m
    };
    let mut p0 = ComplexMatrix::zeros(3 + blocks, 3 + blocks);
    p0.set_block(3, 3, &block_projection(1, blocks, 0));
    let big = BetaSequence::from_weights(beta.weights().to_vec()).unwrap();
    let curve = near_row(&ra, &r0, &big, blocks, Some(&p0), &cfg()).unwrap();
    assert!(curve.value.is_finite());
    for w in curve.per_n.windows(2) {
        assert!(w[1] >= w[0] - 1e-12);
    }
}

#[test]
fn unitary_case_bounded_iff_certified() {
    let mut rng = ChaCha8Rng::seed_from_u64(25);
    for i in 0..12 {
        let h = rng.random_range(1..=5);
        let u = random_unitary(&mut rng, h);
        let t = random_contraction(&mut rng, 3, 0.6);
        let x = random_complex_matrix(&mut rng, 3, h);
        let b = BlockUpper::new(
            WindowedOperator::finite(t.clone()).unwrap(),
            x.clone(),
            WindowedOperator::finite(u.clone()).unwrap(),
        )
        .unwrap();
        let profile = power_profile(&b.assemble(), 64, &cfg()).unwrap();
        assert!(profile.growth.is_bounded(), "instance {i}");
        let sol = partial_sum_solution(&t, &u, &x, 128, SumMode::Plain, &cfg()).unwrap();
        let cert = certify_similarity(&b, &sol.z, &cfg()).unwrap();
        assert!(cert.conjugation_residual < 1e-9);
    }
}
