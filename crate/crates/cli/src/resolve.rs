//! Turns operator specs into matrices, following references.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use simlab::car::{hankel_gamma, HankelSpec};
use simlab::linalg::random::{random_complex_matrix, random_contraction, random_unitary};
use simlab::operator::{
    left_inverse_of_weighted_shift, truncated_shift, weighted_shift, Ambient, BetaSequence, BlockUpper,
    WindowedOperator,
};
use simlab::{ComplexMatrix, ToleranceConfig};

use crate::error::CliError;
use crate::schema::{OperatorSpec, SpecDocument};

/// A resolved operator. Square operators keep their window; rectangular
/// ones (typically `X` blocks) have none. Block operators also keep their
/// `(T, X, V)` triple.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub matrix: ComplexMatrix,
    pub windowed: Option<WindowedOperator>,
    pub block: Option<BlockUpper>,
}

impl Resolved {
    fn square(op: WindowedOperator) -> Self {
        Self {
            matrix: op.matrix().clone(),
            windowed: Some(op),
            block: None,
        }
    }

    fn plain(matrix: ComplexMatrix) -> Self {
        let windowed = WindowedOperator::finite(matrix.clone()).ok();
        Self {
            matrix,
            windowed,
            block: None,
        }
    }

    fn block_upper(b: BlockUpper) -> Self {
        let mut r = Self::plain(b.assemble());
        r.block = Some(b);
        r
    }

    pub fn guard(&self) -> Option<usize> {
        match &self.windowed {
            Some(w) if matches!(w.ambient(), Ambient::Truncated { .. }) => Some(w.guard()),
            _ => None,
        }
    }
}

/// `seed` of a random operator combined with the document seed.
pub fn mix_seed(base: u64, local: u64) -> u64 {
    base.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(local)
}

pub struct Resolver<'a> {
    doc: &'a SpecDocument,
    seed: u64,
    cfg: ToleranceConfig,
    cache: BTreeMap<String, Resolved>,
}

fn spec_err(path: String, message: impl Into<String>) -> CliError {
    CliError::Spec {
        path,
        message: message.into(),
    }
}

impl<'a> Resolver<'a> {
    pub fn new(doc: &'a SpecDocument, seed: u64, cfg: ToleranceConfig) -> Self {
        Self {
            doc,
            seed,
            cfg,
            cache: BTreeMap::new(),
        }
    }

    pub fn resolve(&mut self, name: &str) -> Result<Resolved, CliError> {
        self.resolve_inner(name, &mut Vec::new())
    }

    fn resolve_inner(&mut self, name: &str, stack: &mut Vec<String>) -> Result<Resolved, CliError> {
        if let Some(r) = self.cache.get(name) {
            return Ok(r.clone());
        }
        let path = format!("operators.{name}");
        if stack.iter().any(|s| s == name) {
            return Err(spec_err(
                path,
                format!("reference cycle through {}", stack.join(" -> ")),
            ));
        }
        let Some(spec) = self.doc.operators.get(name) else {
            return Err(CliError::Unresolved {
                path: stack
                    .last()
                    .map(|s| format!("operators.{s}"))
                    .unwrap_or_else(|| "operators".into()),
                name: name.to_string(),
            });
        };
        stack.push(name.to_string());
        let mut dep = |this: &mut Self, field: &str, r: &str| -> Result<Resolved, CliError> {
            match this.resolve_inner(r, stack) {
                Err(CliError::Unresolved { name, .. }) => Err(CliError::Unresolved {
                    path: format!("{path}.{field}"),
                    name,
                }),
                other => other,
            }
        };
        let cap = self.cfg.size_cap;
        let check_dim = |field: &str, n: usize| -> Result<(), CliError> {
            if n == 0 || n > cap {
                Err(spec_err(
                    format!("{path}.{field}"),
                    format!("dimension {n} outside 1..={cap}"),
                ))
            } else {
                Ok(())
            }
        };
        let core = |e: simlab::Error| spec_err(path.clone(), e.to_string());
        let resolved = match spec {
            OperatorSpec::Dense { rows } => {
                check_dim("rows", rows.len())?;
                let cols = rows[0].len();
                check_dim("rows[0]", cols)?;
                for (i, r) in rows.iter().enumerate() {
                    if r.len() != cols {
                        return Err(spec_err(
                            format!("{path}.rows[{i}]"),
                            format!("row has {} entries, expected {cols}", r.len()),
                        ));
                    }
                }
                Resolved::plain(ComplexMatrix::from_fn(rows.len(), cols, |i, j| rows[i][j].value()))
            }
            OperatorSpec::Diagonal { entries } => {
                check_dim("entries", entries.len())?;
                Resolved::plain(ComplexMatrix::diag(
                    &entries.iter().map(|e| e.value()).collect::<Vec<_>>(),
                ))
            }
            OperatorSpec::Identity { dim } => {
                check_dim("dim", *dim)?;
                Resolved::plain(ComplexMatrix::identity(*dim))
            }
            OperatorSpec::Zero { rows, cols } => {
                check_dim("rows", *rows)?;
                check_dim("cols", *cols)?;
                Resolved::plain(ComplexMatrix::zeros(*rows, *cols))
            }
            OperatorSpec::Shift { d, n, guard } => {
                let mut op = truncated_shift(*d, *n).map_err(core)?;
                if let Some(g) = guard {
                    op = op.with_guard(*g).map_err(core)?;
                }
                Resolved::square(op)
            }
            OperatorSpec::WeightedShift { weights, d, n, guard } => {
                let beta = BetaSequence::from_weights(weights.clone()).map_err(core)?;
                let mut op = weighted_shift(&beta, *d, *n).map_err(core)?;
                if let Some(g) = guard {
                    op = op.with_guard(*g).map_err(core)?;
                }
                Resolved::square(op)
            }
            OperatorSpec::LeftInverse { of } => {
                let base = dep(self, "of", of)?;
                let Some(w) = base.windowed else {
                    return Err(spec_err(format!("{path}.of"), "left inverse needs a weighted shift"));
                };
                Resolved::square(left_inverse_of_weighted_shift(&w).map_err(core)?)
            }
            OperatorSpec::RandomMatrix { rows, cols, seed } => {
                check_dim("rows", *rows)?;
                check_dim("cols", *cols)?;
                let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(self.seed, *seed));
                Resolved::plain(random_complex_matrix(&mut rng, *rows, *cols))
            }
            OperatorSpec::RandomContraction { dim, bound, seed } => {
                check_dim("dim", *dim)?;
                if !(*bound >= 0.0 && bound.is_finite()) {
                    return Err(spec_err(
                        format!("{path}.bound"),
                        format!("bound must be finite and >= 0, got {bound}"),
                    ));
                }
                let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(self.seed, *seed));
                Resolved::plain(random_contraction(&mut rng, *dim, *bound))
            }
            OperatorSpec::RandomUnitary { dim, seed } => {
                check_dim("dim", *dim)?;
                let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(self.seed, *seed));
                Resolved::plain(random_unitary(&mut rng, *dim))
            }
            OperatorSpec::Adjoint { of } => {
                let base = dep(self, "of", of)?;
                match base.windowed {
                    Some(w) => Resolved::square(w.adjoint()),
                    None => Resolved::plain(base.matrix.adjoint()),
                }
            }
            OperatorSpec::Scaled { of, factor } => {
                let base = dep(self, "of", of)?;
                let m = base.matrix.scale(factor.value());
                match base.windowed {
                    Some(w) => Resolved::square(WindowedOperator::with_window(m, w.window()).map_err(core)?),
                    None => Resolved::plain(m),
                }
            }
            OperatorSpec::Sum { terms } => {
                if terms.is_empty() {
                    return Err(spec_err(format!("{path}.terms"), "empty sum"));
                }
                let mut acc: Option<ComplexMatrix> = None;
                for (i, t) in terms.iter().enumerate() {
                    let m = dep(self, "terms", t)?.matrix;
                    acc = Some(match acc {
                        None => m,
                        Some(a) if a.shape() == m.shape() => &a + &m,
                        Some(a) => {
                            return Err(spec_err(
                                format!("{path}.terms[{i}]"),
                                format!("shape {:?} does not match {:?}", m.shape(), a.shape()),
                            ))
                        }
                    });
                }
                Resolved::plain(acc.expect("non-empty"))
            }
            OperatorSpec::Product { factors } => {
                if factors.is_empty() {
                    return Err(spec_err(format!("{path}.factors"), "empty product"));
                }
                let mut acc: Option<ComplexMatrix> = None;
                for (i, f) in factors.iter().enumerate() {
                    let m = dep(self, "factors", f)?.matrix;
                    acc = Some(match acc {
                        None => m,
                        Some(a) => a
                            .try_matmul(&m, "product")
                            .map_err(|e| spec_err(format!("{path}.factors[{i}]"), e.to_string()))?,
                    });
                }
                Resolved::plain(acc.expect("non-empty"))
            }
            OperatorSpec::Commutator { t, v, z } => {
                let t = dep(self, "t", t)?.matrix;
                let v = dep(self, "v", v)?.matrix;
                let z = dep(self, "z", z)?.matrix;
                if !t.is_square() || !v.is_square() || z.shape() != (t.rows(), v.rows()) {
                    return Err(spec_err(
                        path.clone(),
                        format!(
                            "mismatched block dims: T is {:?}, V is {:?}, Z is {:?}",
                            t.shape(),
                            v.shape(),
                            z.shape()
                        ),
                    ));
                }
                Resolved::plain(simlab::sylvester::commutator(&t, &v, &z))
            }
            OperatorSpec::BlockUpper { t, x, v } => {
                let (tn, vn) = (t, v);
                let t = dep(self, "t", tn)?;
                let x = dep(self, "x", x)?.matrix;
                let v = dep(self, "v", vn)?;
                let (Some(tw), Some(vw)) = (t.windowed, v.windowed) else {
                    return Err(spec_err(
                        path.clone(),
                        format!(
                            "mismatched block dims: T is {:?}, V is {:?}",
                            t.matrix.shape(),
                            v.matrix.shape()
                        ),
                    ));
                };
                if x.shape() != (tw.dim(), vw.dim()) {
                    return Err(spec_err(
                        format!("{path}.x"),
                        format!(
                            "mismatched block dims: X is {:?}, expected {:?} from T {:?} and V {:?}",
                            x.shape(),
                            (tw.dim(), vw.dim()),
                            tw.matrix().shape(),
                            vw.matrix().shape()
                        ),
                    ));
                }
                Resolved::block_upper(BlockUpper::new(tw, x, vw).map_err(core)?)
            }
            OperatorSpec::DirectSum { terms } => {
                if terms.is_empty() {
                    return Err(spec_err(format!("{path}.terms"), "empty direct sum"));
                }
                let mut parts = Vec::with_capacity(terms.len());
                for (i, t) in terms.iter().enumerate() {
                    let r = dep(self, "terms", t)?;
                    if !r.matrix.is_square() {
                        return Err(spec_err(
                            format!("{path}.terms[{i}]"),
                            format!("direct summands must be square, got {:?}", r.matrix.shape()),
                        ));
                    }
                    parts.push(r);
                }
                if let [a, b] = &parts[..] {
                    let (tw, vw) = (a.windowed.clone().expect("square"), b.windowed.clone().expect("square"));
                    let x = ComplexMatrix::zeros(tw.dim(), vw.dim());
                    Resolved::block_upper(BlockUpper::new(tw, x, vw).map_err(core)?)
                } else {
                    let mats: Vec<&ComplexMatrix> = parts.iter().map(|p| &p.matrix).collect();
                    Resolved::plain(ComplexMatrix::block_diag(&mats))
                }
            }
            OperatorSpec::CarHankel { alpha, blocks, modes } => {
                let a = alpha.iter().map(|e| e.value()).collect();
                let spec = HankelSpec::new(a, *blocks, *modes).map_err(core)?;
                Resolved::plain(hankel_gamma(&spec).map_err(core)?)
            }
        };
        stack.pop();
        self.cache.insert(name.to_string(), resolved.clone());
        Ok(resolved)
    }
}
