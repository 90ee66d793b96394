use num_complex::Complex64;

use super::matrix::{ComplexMatrix, ONE, ZERO};
use super::ToleranceConfig;
use crate::error::{Error, Result};

/// LU factorization `PA = LU` with partial pivoting, stored compactly.
#[derive(Debug, Clone)]
pub struct LuFactors {
    lu: ComplexMatrix,
    /// `perm[i]` is the original row placed at position `i`.
    perm: Vec<usize>,
    norm1: f64,
}

#[derive(Debug, Clone)]
pub struct LuSolution {
    pub x: ComplexMatrix,
    /// Estimate of the 1-norm condition number of `A`.
    pub condition_estimate: f64,
    /// `||AX - B||_F / (||A||_F ||X||_F)`.
    pub relative_residual: f64,
    /// Whether `relative_residual <= solve_tol`.
    pub meets_tolerance: bool,
}

fn one_norm(a: &ComplexMatrix) -> f64 {
    (0..a.cols())
        .map(|j| (0..a.rows()).map(|i| a[(i, j)].norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

impl LuFactors {
    pub fn new(a: &ComplexMatrix) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::NotSquare {
                context: "lu",
                rows: a.rows(),
                cols: a.cols(),
            });
        }
        let n = a.rows();
        if n == 0 {
            return Err(Error::Empty { context: "lu" });
        }
        let threshold = (n as f64) * f64::EPSILON * a.max_abs();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (p, pmax) =
                (k..n)
                    .map(|i| (i, lu[(i, k)].norm()))
                    .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pmax <= threshold {
                return Err(Error::Singular { pivot_index: k });
            }
            if p != k {
                for j in 0..n {
                    let t = lu[(k, j)];
                    lu[(k, j)] = lu[(p, j)];
                    lu[(p, j)] = t;
                }
                perm.swap(k, p);
            }
            let pivot = lu[(k, k)];
            for i in k + 1..n {
                let m = lu[(i, k)] / pivot;
                lu[(i, k)] = m;
                if m == ZERO {
                    continue;
                }
                for j in k + 1..n {
                    let u = lu[(k, j)];
                    lu[(i, j)] -= m * u;
                }
            }
        }
        Ok(Self {
            lu,
            perm,
            norm1: one_norm(a),
        })
    }

    pub fn dim(&self) -> usize {
        self.lu.rows()
    }

    /// Solves `A x = b` in place of a vector.
    pub fn solve_vec(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.dim();
        let mut y: Vec<Complex64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut acc = y[i];
            for j in 0..i {
                acc -= self.lu[(i, j)] * y[j];
            }
            y[i] = acc;
        }
        for i in (0..n).rev() {
            let mut acc = y[i];
            for j in i + 1..n {
                acc -= self.lu[(i, j)] * y[j];
            }
            y[i] = acc / self.lu[(i, i)];
        }
        y
    }

    /// Solves `A^* x = b`.
    pub fn solve_adjoint_vec(&self, b: &[Complex64]) -> Vec<Complex64> {
        // A = P^T L U, so A^* = U^* L^* P.
        let n = self.dim();
        let mut w = b.to_vec();
        for i in 0..n {
            let mut acc = w[i];
            for j in 0..i {
                acc -= self.lu[(j, i)].conj() * w[j];
            }
            w[i] = acc / self.lu[(i, i)].conj();
        }
        for i in (0..n).rev() {
            let mut acc = w[i];
            for j in i + 1..n {
                acc -= self.lu[(j, i)].conj() * w[j];
            }
            w[i] = acc;
        }
        let mut x = vec![ZERO; n];
        for (i, &p) in self.perm.iter().enumerate() {
            x[p] = w[i];
        }
        x
    }

    pub fn solve(&self, b: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(b.rows(), self.dim(), "rhs row mismatch");
        let cols: Vec<Vec<Complex64>> = (0..b.cols()).map(|j| self.solve_vec(&b.column(j))).collect();
        ComplexMatrix::from_fn(b.rows(), b.cols(), |i, j| cols[j][i])
    }

    /// Hager's estimate of `||A||_1 ||A^{-1}||_1`.
    pub fn condition_estimate(&self) -> f64 {
        let n = self.dim();
        let mut x = vec![Complex64::new(1.0 / n as f64, 0.0); n];
        let mut est = 0.0;
        for _ in 0..5 {
            let y = self.solve_vec(&x);
            est = y.iter().map(|v| v.norm()).sum::<f64>();
            let xi: Vec<Complex64> = y
                .iter()
                .map(|&v| if v.norm() > 0.0 { v / v.norm() } else { ONE })
                .collect();
            let z = self.solve_adjoint_vec(&xi);
            let (j, zmax) = z
                .iter()
                .enumerate()
                .map(|(i, v)| (i, v.norm()))
                .fold((0, -1.0), |b, c| if c.1 > b.1 { c } else { b });
            let ztx: f64 = z.iter().zip(&x).map(|(zi, xi)| (zi.conj() * xi).re).sum();
            if zmax <= ztx {
                break;
            }
            x = vec![ZERO; n];
            x[j] = ONE;
        }
        est * self.norm1
    }
}

/// Solves `AX = B` by LU with partial pivoting.
pub fn lu_solve(a: &ComplexMatrix, b: &ComplexMatrix, cfg: &ToleranceConfig) -> Result<LuSolution> {
    if b.rows() != a.rows() {
        return Err(Error::DimensionMismatch {
            context: "lu_solve",
            expected: (a.rows(), b.cols()),
            actual: b.shape(),
        });
    }
    let f = LuFactors::new(a)?;
    let x = f.solve(b);
    let condition_estimate = f.condition_estimate();
    let resid = (&a.matmul(&x) - b).frobenius_norm();
    let denom = a.frobenius_norm() * x.frobenius_norm();
    let relative_residual = if denom > 0.0 { resid / denom } else { resid };
    Ok(LuSolution {
        x,
        condition_estimate,
        relative_residual,
        meets_tolerance: relative_residual <= cfg.solve_tol,
    })
}

/// Cholesky factor `A = L L^*` of a Hermitian positive definite matrix.
#[derive(Debug, Clone)]
pub struct Cholesky {
    l: ComplexMatrix,
}

impl Cholesky {
    /// Fails when a pivot falls below `eps` times the largest diagonal entry.
    pub fn new(a: &ComplexMatrix, eps: f64) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::NotSquare {
                context: "cholesky",
                rows: a.rows(),
                cols: a.cols(),
            });
        }
        let n = a.rows();
        if n == 0 {
            return Err(Error::Empty { context: "cholesky" });
        }
        let dmax = (0..n).map(|i| a[(i, i)].re).fold(0.0, f64::max);
        let mut l = ComplexMatrix::zeros(n, n);
        for j in 0..n {
            let mut d = a[(j, j)].re;
            for k in 0..j {
                d -= l[(j, k)].norm_sqr();
            }
            if !(d > eps * dmax) {
                return Err(Error::NotPositiveDefinite { index: j });
            }
            let djj = d.sqrt();
            l[(j, j)] = Complex64::new(djj, 0.0);
            for i in j + 1..n {
                let mut s = a[(i, j)];
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)].conj();
                }
                l[(i, j)] = s / djj;
            }
        }
        Ok(Self { l })
    }

    pub fn factor(&self) -> &ComplexMatrix {
        &self.l
    }

    pub fn solve_vec(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.l.rows();
        assert_eq!(b.len(), n, "cholesky rhs length");
        let mut y = b.to_vec();
        for i in 0..n {
            let mut acc = y[i];
            for k in 0..i {
                acc -= self.l[(i, k)] * y[k];
            }
            y[i] = acc / self.l[(i, i)];
        }
        for i in (0..n).rev() {
            let mut acc = y[i];
            for k in i + 1..n {
                acc -= self.l[(k, i)].conj() * y[k];
            }
            y[i] = acc / self.l[(i, i)];
        }
        y
    }

    /// `<A^{-1} c, c>`, real for Hermitian `A`.
    pub fn inverse_quadratic_form(&self, c: &[Complex64]) -> f64 {
        let y = self.solve_vec(c);
        y.iter().zip(c).map(|(yi, ci)| (yi * ci.conj()).re).sum()
    }
}

#[derive(Debug, Clone)]
pub struct MinNormSolution {
    pub kappa: Vec<Complex64>,
    /// `min ||kappa||^2 = <(AA^*)^{-1} c, c>`.
    pub value: f64,
}

/// Minimum-norm solution of `A kappa = c` via the normal system
/// `kappa = A^* (AA^*)^{-1} c`.
pub fn min_norm_constrained(a: &ComplexMatrix, c: &[Complex64], cfg: &ToleranceConfig) -> Result<MinNormSolution> {
    if c.len() != a.rows() {
        return Err(Error::DimensionMismatch {
            context: "min_norm_constrained",
            expected: (a.rows(), 1),
            actual: (c.len(), 1),
        });
    }
    let gram = a.matmul(&a.adjoint());
    let chol = Cholesky::new(&gram, cfg.solve_tol)?;
    let y = chol.solve_vec(c);
    let kappa = a.adjoint_matvec(&y);
    let value = y.iter().zip(c).map(|(yi, ci)| (yi * ci.conj()).re).sum();
    Ok(MinNormSolution { kappa, value })
}

#[derive(Debug, Clone)]
pub struct LeastSquares {
    pub x: Vec<Complex64>,
    pub rank: usize,
    pub residual_norm: f64,
}

/// Basic least-squares solution of `A x ~ b` by Householder QR with column
/// pivoting. Columns whose pivot drops below `rank_tol * |R_00|` are treated
/// as dependent and their unknowns set to zero.
pub fn lstsq(a: &ComplexMatrix, b: &[Complex64], rank_tol: f64) -> Result<LeastSquares> {
    let (m, n) = a.shape();
    if b.len() != m {
        return Err(Error::DimensionMismatch {
            context: "lstsq",
            expected: (m, 1),
            actual: (b.len(), 1),
        });
    }
    let mut r = a.clone();
    let mut rhs = b.to_vec();
    let mut perm: Vec<usize> = (0..n).collect();
    let steps = m.min(n);
    let mut rank = 0;
    let mut r00 = 0.0;
    for k in 0..steps {
        let (p, pn) = (k..n)
            .map(|j| (j, (k..m).map(|i| r[(i, j)].norm_sqr()).sum::<f64>()))
            .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        let pn = pn.sqrt();
        if k == 0 {
            r00 = pn;
        }
        if pn == 0.0 || pn <= rank_tol * r00 {
            break;
        }
        if p != k {
            for i in 0..m {
                let t = r[(i, k)];
                r[(i, k)] = r[(i, p)];
                r[(i, p)] = t;
            }
            perm.swap(k, p);
        }
        let x0 = r[(k, k)];
        let phase = if x0.norm() > 0.0 { x0 / x0.norm() } else { ONE };
        let alpha = -phase * pn;
        let mut v: Vec<Complex64> = (k..m).map(|i| r[(i, k)]).collect();
        v[0] -= alpha;
        let vn = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if vn > 0.0 {
            v.iter_mut().for_each(|x| *x /= vn);
            for j in k..n {
                let dot = v
                    .iter()
                    .enumerate()
                    .fold(ZERO, |acc, (t, vi)| acc + vi.conj() * r[(k + t, j)]);
                for (t, vi) in v.iter().enumerate() {
                    r[(k + t, j)] -= 2.0 * vi * dot;
                }
            }
            let dot = v
                .iter()
                .enumerate()
                .fold(ZERO, |acc, (t, vi)| acc + vi.conj() * rhs[k + t]);
            for (t, vi) in v.iter().enumerate() {
                rhs[k + t] -= 2.0 * vi * dot;
            }
        }
        rank = k + 1;
    }
    let mut y = vec![ZERO; n];
    for i in (0..rank).rev() {
        let mut acc = rhs[i];
        for j in i + 1..rank {
            acc -= r[(i, j)] * y[j];
        }
        y[i] = acc / r[(i, i)];
    }
    let mut x = vec![ZERO; n];
    for (i, &p) in perm.iter().enumerate() {
        x[p] = y[i];
    }
    let ax = a.matvec(&x);
    let residual_norm = ax.iter().zip(b).map(|(u, v)| (u - v).norm_sqr()).sum::<f64>().sqrt();
    Ok(LeastSquares { x, rank, residual_norm })
}
