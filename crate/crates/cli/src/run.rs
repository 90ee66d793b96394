//! Executes analysis jobs against resolved operators.

use serde::Serialize;
use serde_json::{json, Value};
use simlab::car::{
    a_alpha, b_alpha, car_generators, foguel_nearness, gamma_n_identity_check, intertwining_residual,
    weighted_hankel_bound_check, HankelSpec,
};
use simlab::linalg::{operator_norm, spectral_radius, RadiusVerdict};
use simlab::nearness::{
    build_renorm_model, near_modulo_equivalence_check, parallelogram_check, renorm_contraction_check,
    renorm_equivalence,
};
use simlab::operator::{left_inverse_of_weighted_shift, power_profile, structural_predicates, BetaSequence};
use simlab::perturbation::{gallery_entry, rota_summability, zero_product_check, Summability};
use simlab::sylvester::{
    certify_similarity, decompose_coisometry_case, decompose_isometry_case, decompose_weighted_case, growth_condition,
    partial_sum_solution, solve_sylvester_direct, DecompositionCase, SumMode,
};
use simlab::{ComplexMatrix, ToleranceConfig};

use crate::error::CliError;
use crate::resolve::{mix_seed, Resolved, Resolver};
use crate::schema::{Analysis, AnalysisJob, SylvesterMethod};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(usize),
    Real(f64),
    Text(String),
}

/// One CSV file; `suffix` distinguishes several tables of a job.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub suffix: Option<&'static str>,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    fn new(suffix: Option<&'static str>, header: &[&'static str]) -> Self {
        Self {
            suffix,
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    /// `n, value` rows starting at `first`.
    fn series(suffix: Option<&'static str>, column: &'static str, first: usize, values: &[f64]) -> Self {
        let mut t = Self::new(suffix, &["n", column]);
        for (i, v) in values.iter().enumerate() {
            t.rows.push(vec![Cell::Int(first + i), Cell::Real(*v)]);
        }
        t
    }

    fn quantities(entries: &[(&str, f64)]) -> Self {
        let mut t = Self::new(None, &["quantity", "value"]);
        for (k, v) in entries {
            t.rows.push(vec![Cell::Text(k.to_string()), Cell::Real(*v)]);
        }
        t
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct JobReport {
    pub name: String,
    pub kind: &'static str,
    pub summary: Value,
    pub tables: Vec<Table>,
}

/// FNV-1a, used to derive a per-job seed from its name so that a job gives
/// the same numbers whether run alone or as part of a suite.
fn name_hash(name: &str) -> u64 {
    name.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| {
        (h ^ b as u64).wrapping_mul(0x0100_0000_01b3)
    })
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report values serialize")
}

fn radius_value(r: RadiusVerdict) -> Value {
    match r {
        RadiusVerdict::Estimate(v) => json!({ "verdict": "estimate", "value": v }),
        RadiusVerdict::AtLeast(v) => json!({ "verdict": "at_least", "value": v }),
    }
}

pub fn run_job(
    job: &AnalysisJob,
    resolver: &mut Resolver<'_>,
    cfg: &ToleranceConfig,
    seed: u64,
) -> Result<JobReport, CliError> {
    let analysis_err = |source: simlab::Error| CliError::Analysis {
        job: job.name.clone(),
        source,
    };
    let mut ops: Vec<Resolved> = Vec::new();
    for (_, r) in job.analysis.references() {
        ops.push(resolver.resolve(r)?);
    }
    let job_seed = mix_seed(seed, name_hash(&job.name));
    let (summary, tables) = analyse(&job.analysis, &ops, cfg, job_seed).map_err(analysis_err)?;
    Ok(JobReport {
        name: job.name.clone(),
        kind: job.analysis.kind(),
        summary,
        tables,
    })
}

fn square(op: &Resolved, context: &'static str) -> simlab::Result<simlab::operator::WindowedOperator> {
    op.windowed.clone().ok_or(simlab::Error::NotSquare {
        context,
        rows: op.matrix.rows(),
        cols: op.matrix.cols(),
    })
}

fn analyse(
    analysis: &Analysis,
    ops: &[Resolved],
    cfg: &ToleranceConfig,
    seed: u64,
) -> simlab::Result<(Value, Vec<Table>)> {
    let norm = |m: &ComplexMatrix| operator_norm(m, cfg);
    match analysis {
        Analysis::Diagnose { n_max, .. } => {
            let w = square(&ops[0], "diagnose")?;
            let structure = structural_predicates(&w, cfg)?;
            let profile = power_profile(w.matrix(), *n_max, cfg)?;
            let radius = spectral_radius(w.matrix(), cfg)?;
            let summary = json!({
                "structure": to_value(&structure),
                "spectral_radius": radius_value(radius.verdict),
                "spectral_radius_converged": radius.converged,
                "power_growth": to_value(&profile.growth),
                "power_sup": profile.sup(),
                "power_truncated": profile.truncated,
            });
            Ok((summary, vec![Table::series(None, "norm", 0, &profile.norms)]))
        }
        Analysis::Sylvester { method, n_max, .. } => {
            let (t, v, x) = (&ops[0].matrix, &ops[1].matrix, &ops[2].matrix);
            let sol = match method {
                SylvesterMethod::Kronecker => solve_sylvester_direct(t, v, x, cfg)?,
                SylvesterMethod::PartialSum => partial_sum_solution(t, v, x, *n_max, SumMode::Plain, cfg)?,
                SylvesterMethod::Cesaro => partial_sum_solution(t, v, x, *n_max, SumMode::Cesaro, cfg)?,
                SylvesterMethod::Symmetric => partial_sum_solution(t, v, x, *n_max, SumMode::Symmetric, cfg)?,
            };
            let summary = json!({
                "method": to_value(&sol.method),
                "residual": sol.residual,
                "side_condition_residual": sol.side_condition_residual,
                "solvability": sol.solvability.map(|s| to_value(&s)),
                "z_norm": norm(&sol.z)?,
            });
            let tables = if sol.partial_norms.is_empty() {
                Vec::new()
            } else {
                vec![Table::series(None, "partial_norm", 0, &sol.partial_norms)]
            };
            Ok((summary, tables))
        }
        Analysis::Growth { side, n_max, .. } => {
            let (t, v, x) = (&ops[0].matrix, &ops[1].matrix, &ops[2].matrix);
            let report = growth_condition(t, v, x, *n_max, *side, cfg)?;
            let table = Table::series(None, "partial_norm", 0, &report.partial_norms);
            let mut summary = to_value(&report);
            if let Value::Object(m) = &mut summary {
                m.remove("partial_norms");
            }
            Ok((summary, vec![table]))
        }
        Analysis::Decompose { case, n_max, z, .. } => {
            let (t, v, x) = (&ops[0].matrix, &ops[1].matrix, &ops[2].matrix);
            let (z, source) = match z {
                Some(_) => (ops[3].matrix.clone(), "given"),
                None => (
                    partial_sum_solution(t, v, x, *n_max, SumMode::Plain, cfg)?.z,
                    "partial_sum",
                ),
            };
            let dec = match case {
                DecompositionCase::Coisometry => decompose_coisometry_case(t, v, x, &z, cfg)?,
                DecompositionCase::Isometry => decompose_isometry_case(t, v, x, &z, cfg)?,
                DecompositionCase::Weighted => {
                    let l = left_inverse_of_weighted_shift(&square(&ops[1], "decompose")?)?;
                    decompose_weighted_case(t, v, l.matrix(), x, &z, cfg)?
                }
            };
            let r = dec.residuals;
            let summary = json!({
                "case": to_value(&dec.case),
                "z_source": source,
                "residuals": to_value(&r),
                "max_residual": r.max(),
                "a_norm": norm(&dec.a)?,
                "f_norm": norm(&dec.f)?,
                "d_norm": norm(&dec.d)?,
            });
            let table = Table::quantities(&[
                ("split", r.split),
                ("annihilation", r.annihilation),
                ("representation", r.representation),
                ("side_condition", r.side_condition),
                ("nilpotent", r.nilpotent),
                ("zero_product", r.zero_product),
            ]);
            Ok((summary, vec![table]))
        }
        Analysis::Certify { z, .. } => {
            let b = ops[0].block.as_ref().ok_or(simlab::Error::InvalidParameter {
                name: "operator",
                reason: "certify needs a block_upper operator".into(),
            })?;
            let (z, source, solve_residual) = match z {
                Some(_) => (ops[1].matrix.clone(), "given", None),
                None => {
                    let sol = solve_sylvester_direct(b.t.matrix(), b.v.matrix(), &b.x, cfg)?;
                    (sol.z, "direct", Some(sol.residual))
                }
            };
            let cert = certify_similarity(b, &z, cfg)?;
            let summary = json!({
                "z_source": source,
                "solve_residual": solve_residual,
                "z_norm": norm(&z)?,
                "conjugation_residual": cert.conjugation_residual,
                "tolerance": cert.tolerance,
                "condition_number": cert.condition_number,
                "diagonal_norm": cert.diagonal_norm,
            });
            let table = Table::quantities(&[
                ("conjugation_residual", cert.conjugation_residual),
                ("condition_number", cert.condition_number),
                ("diagonal_norm", cert.diagonal_norm),
            ]);
            Ok((summary, vec![table]))
        }
        Analysis::Nearness {
            weights, n, projection, ..
        } => {
            let (t, c) = (&ops[0].matrix, &ops[1].matrix);
            let beta = match weights {
                Some(w) => BetaSequence::from_weights(w.clone())?,
                None => BetaSequence::ones(n + 1),
            };
            let p0 = projection.map(|p| {
                let mut d = vec![0.0; t.rows()];
                d[p.start..p.start + p.len].iter_mut().for_each(|x| *x = 1.0);
                ComplexMatrix::diag_real(&d)
            });
            let report = near_modulo_equivalence_check(t, c, &beta, p0.as_ref(), *n, cfg)?;
            let summary = json!({
                "value": report.row.value,
                "gram_value": report.gram.value,
                "difference": report.difference,
                "agrees": report.agrees,
                "projected": report.projected,
            });
            let mut table = Table::new(None, &["n", "gram", "row"]);
            for (i, (g, r)) in report.gram.per_n.iter().zip(&report.row.per_n).enumerate() {
                table.rows.push(vec![Cell::Int(i + 1), Cell::Real(*g), Cell::Real(*r)]);
            }
            Ok((summary, vec![table]))
        }
        Analysis::Renorm { depth, samples, .. } => {
            let (t, x) = (&ops[0].matrix, &ops[1].matrix);
            let s = square(&ops[2], "renorm")?;
            let model = build_renorm_model(t, x, &s, *depth, cfg)?;
            let eq = renorm_equivalence(&model, *samples, seed, cfg)?;
            let parallelogram = parallelogram_check(&model, *samples, seed.wrapping_add(1))?;
            let tol = cfg.norm_tol.max(cfg.identity_tol);
            let contraction = if model.t_norm <= 1.0 + tol && model.s_norm <= 1.0 + tol {
                Some(renorm_contraction_check(&model, *samples, seed.wrapping_add(2), cfg)?)
            } else {
                None
            };
            let summary = json!({
                "nearness_constant": model.nearness_constant,
                "recurrence_residual": model.recurrence_residual,
                "t_norm": model.t_norm,
                "s_norm": model.s_norm,
                "equivalence": to_value(&eq),
                "parallelogram_residual": parallelogram,
                "contraction": contraction.map(|c| to_value(&c)),
            });
            let mut q = vec![
                ("nearness_constant", model.nearness_constant),
                ("c_lower", eq.c_lower),
                ("c_upper", eq.c_upper),
                ("envelope_lower", eq.envelope_lower),
                ("envelope_upper", eq.envelope_upper),
                ("parallelogram_residual", parallelogram),
            ];
            if let Some(c) = contraction {
                q.push(("max_proof_excess", c.max_proof_excess));
                q.push(("max_closed_form_excess", c.max_closed_form_excess));
            }
            Ok((summary, vec![Table::quantities(&q)]))
        }
        Analysis::Car { alpha, blocks, modes } => {
            let spec = HankelSpec::new(alpha.iter().map(|e| e.value()).collect(), *blocks, *modes)?;
            let relations = car_generators(*modes)?.relation_residuals();
            let intertwining = intertwining_residual(&spec, cfg)?;
            let gamma = gamma_n_identity_check(&spec, blocks - 1, cfg)?;
            let bound = weighted_hankel_bound_check(&spec, cfg)?;
            let nearness = foguel_nearness(&spec, cfg)?;
            let summary = json!({
                "relations": to_value(&relations),
                "intertwining_residual": intertwining,
                "gamma_identity_max_residual": gamma.iter().fold(0.0f64, |m, &v| m.max(v)),
                "a_alpha": a_alpha(spec.alpha()),
                "b_alpha": b_alpha(spec.alpha()),
                "weighted_hankel": to_value(&bound),
                "nearness": nearness.value,
                "nearness_within_bound": nearness.value <= bound.bound + cfg.norm_tol.max(bound.bound * cfg.norm_tol),
            });
            let tables = vec![
                Table::series(Some("nearness"), "nearness", 1, &nearness.per_n),
                Table::series(Some("gamma"), "residual", 1, &gamma),
            ];
            Ok((summary, tables))
        }
        Analysis::Gallery { instance, n_max } => {
            let entry = gallery_entry(instance, cfg)?;
            let profile = power_profile(&entry.t, *n_max, cfg)?;
            let zp = zero_product_check(&entry.e, &entry.c, cfg)?;
            let rota = rota_summability(&entry.e, *n_max, cfg)?;
            let summary = json!({
                "description": entry.description,
                "checks": to_value(&entry.checks),
                "power_growth": to_value(&profile.growth),
                "power_sup": profile.sup(),
                "zero_product": {
                    "ec_norm": zp.ec_norm,
                    "is_zero_product": zp.is_zero_product,
                    "nilpotency_order": zp.nilpotency_order,
                    "spectral_radius": radius_value(zp.spectral_radius),
                },
                "rota": {
                    "partial_sum": rota.partial_sum,
                    "tail_bound": rota.tail_bound,
                    "convergent": rota.verdict == Summability::Convergent,
                },
            });
            Ok((summary, vec![Table::series(None, "norm", 0, &profile.norms)]))
        }
    }
}
