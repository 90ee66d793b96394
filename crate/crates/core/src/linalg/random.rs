//! Seeded random generators for test instances and sampling.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::matrix::{inner, vector_norm, ComplexMatrix};

/// Standard complex Gaussian scalar (unit variance).
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn random_complex_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<Complex64> {
    (0..n).map(|_| complex_normal(rng)).collect()
}

pub fn random_complex_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| complex_normal(rng))
}

/// Haar-like unitary from Gram-Schmidt on a Gaussian matrix.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ComplexMatrix {
    let g = random_complex_matrix(rng, n, n);
    let mut cols: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    for j in 0..n {
        let mut v = g.column(j);
        for _ in 0..2 {
            for q in &cols {
                let p = inner(&v, q);
                for (vi, &qi) in v.iter_mut().zip(q) {
                    *vi -= p * qi;
                }
            }
        }
        let nv = vector_norm(&v);
        v.iter_mut().for_each(|x| *x /= nv);
        cols.push(v);
    }
    ComplexMatrix::from_fn(n, n, |i, j| cols[j][i])
}

/// Random matrix rescaled so that its Frobenius norm equals `bound`; the
/// operator norm is then at most `bound`.
pub fn random_contraction<R: Rng + ?Sized>(rng: &mut R, n: usize, bound: f64) -> ComplexMatrix {
    let g = random_complex_matrix(rng, n, n);
    let f = g.frobenius_norm();
    g.scale_real(bound / f)
}
