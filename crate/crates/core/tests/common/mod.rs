//! Test-only oracles, deliberately independent of the library routes.
#![allow(dead_code)]

use num_complex::Complex64;
use rand::Rng;
use simlab::linalg::random::{complex_normal, random_unitary};
use simlab::ComplexMatrix;

/// Singular values by one-sided Jacobi rotations on the columns.
pub fn jacobi_singular_values(a: &ComplexMatrix) -> Vec<f64> {
    let (m, n) = a.shape();
    let mut cols: Vec<Vec<Complex64>> = (0..n).map(|j| (0..m).map(|i| a[(i, j)]).collect()).collect();
    for _sweep in 0..80 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha: f64 = cols[p].iter().map(|z| z.norm_sqr()).sum();
                let beta: f64 = cols[q].iter().map(|z| z.norm_sqr()).sum();
                let gamma: Complex64 = cols[p].iter().zip(&cols[q]).map(|(x, y)| x.conj() * y).sum();
                let g = gamma.norm();
                if g <= 1e-15 * (alpha * beta).sqrt() || g == 0.0 {
                    continue;
                }
                rotated = true;
                let phase = gamma / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..m {
                    let x = cols[p][i];
                    let y = cols[q][i] * phase.conj();
                    cols[p][i] = x * c - y * s;
                    cols[q][i] = x * s + y * c;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv: Vec<f64> = cols
        .iter()
        .map(|c| c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
        .collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
    sv
}

pub fn sigma_max(a: &ComplexMatrix) -> f64 {
    jacobi_singular_values(a).first().copied().unwrap_or(0.0)
}

/// Dense solve by Gaussian elimination with complete pivoting.
pub fn gauss_solve(a: &ComplexMatrix, b: &[Complex64]) -> Vec<Complex64> {
    let n = a.rows();
    let mut m: Vec<Vec<Complex64>> = (0..n)
        .map(|i| {
            let mut row: Vec<Complex64> = (0..n).map(|j| a[(i, j)]).collect();
            row.push(b[i]);
            row
        })
        .collect();
    let mut colperm: Vec<usize> = (0..n).collect();
    for k in 0..n {
        let (mut pi, mut pj, mut best) = (k, k, -1.0);
        for (i, row) in m.iter().enumerate().skip(k) {
            for (j, v) in row.iter().enumerate().take(n).skip(k) {
                if v.norm() > best {
                    best = v.norm();
                    pi = i;
                    pj = j;
                }
            }
        }
        m.swap(k, pi);
        for row in m.iter_mut() {
            row.swap(k, pj);
        }
        colperm.swap(k, pj);
        let piv = m[k][k];
        for i in k + 1..n {
            let f = m[i][k] / piv;
            if f == Complex64::new(0.0, 0.0) {
                continue;
            }
            for j in k..=n {
                let v = m[k][j];
                m[i][j] -= f * v;
            }
        }
    }
    let mut y = vec![Complex64::new(0.0, 0.0); n];
    for k in (0..n).rev() {
        let mut acc = m[k][n];
        for j in k + 1..n {
            acc -= m[k][j] * y[j];
        }
        y[k] = acc / m[k][k];
    }
    let mut x = vec![Complex64::new(0.0, 0.0); n];
    for (k, &c) in colperm.iter().enumerate() {
        x[c] = y[k];
    }
    x
}

/// `min ||kappa||^2` subject to `A kappa = c`, from the saddle-point system
/// `[[I, A^*], [A, 0]] [kappa; lambda] = [0; c]`.
pub fn kkt_min_norm(a: &ComplexMatrix, c: &[Complex64]) -> (Vec<Complex64>, f64) {
    let (r, n) = a.shape();
    let mut k = ComplexMatrix::zeros(n + r, n + r);
    k.set_block(0, 0, &ComplexMatrix::identity(n));
    k.set_block(0, n, &a.adjoint());
    k.set_block(n, 0, a);
    let mut rhs = vec![Complex64::new(0.0, 0.0); n];
    rhs.extend_from_slice(c);
    let sol = gauss_solve(&k, &rhs);
    let kappa = sol[..n].to_vec();
    let value = kappa.iter().map(|z| z.norm_sqr()).sum();
    (kappa, value)
}

/// `sum_j A_j (x) T^j` by Horner's rule on block operators.
pub fn horner_block(coeffs: &[ComplexMatrix], t: &ComplexMatrix) -> ComplexMatrix {
    let p = coeffs[0].rows();
    let m = t.rows();
    let lift = |a: &ComplexMatrix| {
        ComplexMatrix::from_fn(p * m, p * m, |i, j| {
            if i % m == j % m {
                a[(i / m, j / m)]
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    };
    let ipt = ComplexMatrix::from_fn(p * m, p * m, |i, j| {
        if i / m == j / m {
            t[(i % m, j % m)]
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let mut acc = lift(coeffs.last().unwrap());
    for a in coeffs.iter().rev().skip(1) {
        acc = &acc.matmul(&ipt) + &lift(a);
    }
    acc
}

/// `L_n = 1/(2n+1) + (2/pi) sum_{k=1}^n tan(pi k / (2n+1)) / k`.
pub fn lebesgue_constant(n: usize) -> f64 {
    let m = (2 * n + 1) as f64;
    1.0 / m
        + 2.0 / std::f64::consts::PI
            * (1..=n)
                .map(|k| (std::f64::consts::PI * k as f64 / m).tan() / k as f64)
                .sum::<f64>()
}

/// `Q (D + N) Q^*` with eigenvalues `centre + radius * u`, `|u| <= 1`.
pub fn matrix_with_spectrum_near<R: Rng>(
    rng: &mut R,
    n: usize,
    centre: f64,
    radius: f64,
) -> (ComplexMatrix, Vec<Complex64>) {
    let q = random_unitary(rng, n);
    let mut tri = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        let u = complex_normal(rng);
        let u = u / (1.0 + u.norm());
        tri[(i, i)] = Complex64::new(centre, 0.0) + u * radius;
        for j in i + 1..n {
            tri[(i, j)] = complex_normal(rng) * 0.3;
        }
    }
    let eig = (0..n).map(|i| tri[(i, i)]).collect();
    (q.matmul(&tri).matmul(&q.adjoint()), eig)
}

pub fn max_abs_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    (a - b).max_abs()
}
