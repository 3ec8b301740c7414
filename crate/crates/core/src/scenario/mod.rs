//! Scenario files, analysis dispatch and reports.
//!
//! # Format
//!
//! Line oriented; `#` starts a comment. Top-level lines are `key = value`
//! pairs (`scenario`, optional `format`) and blocks `kind [name] {` … `}`
//! holding `key = value` lines. Blocks do not nest.
//!
//! ```text
//! scenario = demo
//! grid {
//!   labels = t1 t2
//!   dim = 2
//! }
//! operator BP {
//!   row = 0.7071067811865476 0.7071067811865476
//!   row = 0.7071067811865476 -0.7071067811865476
//! }
//! bridges {
//!   t1-t2 = hamiltonian X duration 0.5
//! }
//! history h {
//!   term = 1+0i t2:P0 t1:P0
//! }
//! analysis lgi {
//!   a1 = Z
//!   a2 = X
//!   b1 = BP
//!   b2 = Z
//! }
//! ```
//!
//! Complex numbers are written `re`, `re+imi` or `imi` without spaces.
//! Built-in operators are `I`, `X`, `Y`, `Z`, `H` (qubits) and the
//! computational projectors `P<k>`. Bridges not listed are the identity.
//! See `docs/scenario-format.md` in the repository for the full grammar.

mod emit;
mod mz;
mod parse;
mod report;
mod spec;

pub use emit::{emit, fmt_complex, fmt_real};
pub use mz::{
    arm_branch, build_mach_zehnder, detector_family, four_branch_family, mz_demo, verify_no_extraction,
    verify_no_extraction_tol,
};
pub use parse::{parse_complex, parse_scenario, ParseError, ParseErrorKind};
pub use report::{Check, Metric, Provenance, Report, Section, Value};
pub use spec::*;

use std::fmt;

use num_complex::Complex64 as C64;

use crate::error::Error;
use crate::history::{check_consistency_with, Completeness, TimeGrid, TimeLabel};
use crate::kernel::ComplexMatrix;
use crate::monogamy::{pair_fidelities, temporal_monogamy_search};
use crate::nonlocality::{
    correlation_table, lgi_value, lhv_bound, operator_bound_check, seesaw_maximize_with, BellFunctional, LgiSettings,
    MeasurementSetting, SeesawOptions,
};
use crate::reduction::{partial_trace, purity, ReducedHistoryOperator, TemporalBasis};

/// Module error raised while running one analysis.
#[derive(Debug, Clone, PartialEq)]
pub struct RunError {
    pub analysis: String,
    pub source: Error,
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "analysis `{}`: {}", self.analysis, self.source)
    }
}

impl std::error::Error for RunError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.source)
    }
}

fn section_names(spec: &ScenarioSpec) -> Vec<String> {
    let kinds: Vec<&str> = spec.analyses.iter().map(AnalysisSpec::kind).collect();
    kinds
        .iter()
        .enumerate()
        .map(|(i, k)| {
            if kinds.iter().filter(|o| *o == k).count() > 1 {
                let n = kinds[..=i].iter().filter(|o| *o == k).count();
                format!("{k}#{n}")
            } else {
                k.to_string()
            }
        })
        .collect()
}

/// Runs every analysis in declaration order.
pub fn run_scenario(spec: &ScenarioSpec) -> Result<Report, RunError> {
    let names = section_names(spec);
    let mut sections = Vec::new();
    let mut seeds = Vec::new();
    let mut tolerances = Vec::new();
    for (a, name) in spec.analyses.iter().zip(&names) {
        let tag = |source| RunError { analysis: name.clone(), source };
        let mut section = run_analysis(spec, a).map_err(tag)?;
        section.name = name.clone();
        tolerances.push((name.clone(), a.tol()));
        match a {
            AnalysisSpec::Monogamy(m) => seeds.push((name.clone(), m.seed)),
            AnalysisSpec::Lgi(LgiSpec { mode: LgiMode::Seesaw { seed, .. }, .. }) => seeds.push((name.clone(), *seed)),
            _ => {}
        }
        sections.push(section);
    }
    Ok(Report {
        scenario: spec.name.clone(),
        sections,
        provenance: Provenance {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            format_version: FORMAT_VERSION.to_string(),
            seeds,
            tolerances,
        },
    })
}

fn run_analysis(spec: &ScenarioSpec, a: &AnalysisSpec) -> crate::Result<Section> {
    match a {
        AnalysisSpec::Consistency(c) => run_consistency(spec, c),
        AnalysisSpec::Reduce(r) => run_reduce(spec, r),
        AnalysisSpec::Lgi(l) => run_lgi(spec, l),
        AnalysisSpec::Monogamy(m) => run_monogamy(m),
        AnalysisSpec::MzDemo(m) => mz_demo(spec, m.tol),
    }
}

fn matrix_value(m: &ComplexMatrix) -> Value {
    Value::List(
        m.rows()
            .into_iter()
            .map(|r| Value::List(r.into_iter().flat_map(|z| [Value::Num(z.re), Value::Num(z.im)]).collect()))
            .collect(),
    )
}

fn run_consistency(spec: &ScenarioSpec, c: &ConsistencySpec) -> crate::Result<Section> {
    let family = c.histories.iter().map(|n| spec.history(n)).collect::<crate::Result<Vec<_>>>()?;
    let grid = family[0].grid().clone();
    for h in &family {
        grid.ensure_same(h.grid())?;
    }
    let s = spec.schedule()?.restrict(&grid)?;
    let report = check_consistency_with(&family, &s, c.tol, c.coefficients.as_deref())?;
    let mut sec = Section::new("consistency");
    sec.metric(Metric::at_most("max_offdiag", report.max_offdiag, 0.0, c.tol))
        .metric(Metric::info("total_weight", report.total_weight(), c.tol))
        .detail("histories", Value::List(c.histories.iter().cloned().map(Value::Str).collect()))
        .detail("weights", Value::nums(&report.diagonal))
        .detail("gram_re_im", matrix_value(&report.gram))
        .detail("projective", Value::Bool(report.projective));
    match report.completeness {
        Completeness::NotChecked(why) => {
            sec.note(format!("completeness not checked: {why}"));
        }
        Completeness::Checked { residual, complete, rooted_residual, rooted_complete } => {
            sec.metric(Metric::info("completeness_residual", residual, c.tol))
                .detail("complete", Value::Bool(complete));
            if let (Some(r), Some(ok)) = (rooted_residual, rooted_complete) {
                sec.metric(Metric::info("rooted_completeness_residual", r, c.tol))
                    .detail("rooted_complete", Value::Bool(ok));
            }
        }
    }
    Ok(sec)
}

fn run_reduce(spec: &ScenarioSpec, r: &ReduceSpec) -> crate::Result<Section> {
    let y = spec.history(&r.history)?;
    let s = spec.schedule_for(&y)?;
    let dim = spec.grid.dim();
    let basis = match &r.basis {
        BasisSpec::MatrixUnits | BasisSpec::Computational => {
            let [t] = r.trace.as_slice() else {
                return Err(Error::IncompleteBasis(
                    "built-in bases cover a single traced label; name basis histories instead".into(),
                ));
            };
            if matches!(r.basis, BasisSpec::MatrixUnits) {
                TemporalBasis::matrix_units(*t, dim)?
            } else {
                TemporalBasis::computational(*t, dim)?
            }
        }
        BasisSpec::Histories(ns) => TemporalBasis::new(
            ns.iter().map(|n| spec.history(n)).collect::<crate::Result<Vec<_>>>()?,
            crate::reduction::BASIS_TOL,
        )?,
    };
    let rho = partial_trace(&y, &r.trace, &basis, &s)?;
    let p = purity(&rho)?;
    let norm = y.tensor_norm_sq();
    let mut sec = Section::new("reduce");
    sec.metric(Metric::equal("trace", rho.trace(), norm, r.tol.max(1e-12) * norm.max(1.0)))
        .metric(match r.expect_purity {
            Some(e) => Metric::equal("purity", p, e, r.tol),
            None => Metric::info("purity", p, r.tol),
        })
        .detail("rank", Value::Int(rho.rank() as i64))
        .detail("spectrum", Value::nums(&rho.normalized()?.spectrum()?));
    if let Some(t) = &r.target {
        let target = spec.history(t)?;
        let f = rho.fidelity_to_pure(&target)?;
        sec.metric(match r.expect_fidelity {
            Some(e) => Metric::equal("fidelity_to_target", f, e, r.tol),
            None => Metric::info("fidelity_to_target", f, r.tol),
        });
        sec.detail("target", Value::Str(t.clone()));
    }
    for w in rho.warnings() {
        sec.note(w.clone());
    }
    Ok(sec)
}

fn lgi_times(spec: &ScenarioSpec, l: &LgiSpec) -> (TimeLabel, TimeLabel) {
    l.at.unwrap_or((spec.grid.first(), spec.grid.last()))
}

fn run_lgi(spec: &ScenarioSpec, l: &LgiSpec) -> crate::Result<Section> {
    let (ta, tb) = lgi_times(spec, l);
    let full = spec.schedule()?;
    let dim = spec.grid.dim();
    let rho0 = match &l.rho {
        Some(n) => spec.operator(n).ok_or_else(|| Error::MissingHistory(format!("operator `{n}`")))?,
        None => ComplexMatrix::identity(dim).scale_real(1.0 / dim as f64),
    };
    let tsirelson = 2.0 * 2f64.sqrt();
    let mut sec = Section::new("lgi");
    let lhv = lhv_bound(&BellFunctional::lgi());
    sec.metric(Metric::equal("lhv_bound", lhv, 2.0, 0.0));
    let settings = match &l.mode {
        LgiMode::Settings(names) => {
            let m = |n: &str, t| -> crate::Result<MeasurementSetting> {
                let o = spec.operator(n).ok_or_else(|| Error::MissingHistory(format!("operator `{n}`")))?;
                MeasurementSetting::new(o, t)
            };
            let settings = LgiSettings::new(m(&names[0], ta)?, m(&names[1], ta)?, m(&names[2], tb)?, m(&names[3], tb)?);
            let s_val = lgi_value(&settings, &full, &rho0)?;
            let table = correlation_table(&settings, &full, &rho0)?;
            sec.metric(match l.expected {
                Some(e) => Metric::equal("S", s_val, e, l.tol),
                None => Metric::at_most("S", s_val, tsirelson, 1e-9),
            })
            .detail("correlators", Value::List(table.rows().iter().map(|r| Value::nums(r)).collect()));
            settings
        }
        LgiMode::Seesaw { restarts, seed, optimize_state, restrict_diagonal } => {
            let sub = TimeGrid::new(vec![ta, tb], dim)?;
            let s = full.restrict(&sub)?;
            let opts = SeesawOptions {
                optimize_state: *optimize_state,
                restrict_diagonal: *restrict_diagonal,
                ..Default::default()
            };
            let r = seesaw_maximize_with(dim, &s, *restarts, *seed, &opts)?;
            sec.metric(match l.expected {
                Some(e) => Metric::equal("S", r.value, e, l.tol),
                None => Metric::at_most("S", r.value, tsirelson, 1e-9),
            })
            .detail("converged", Value::Bool(r.converged))
            .detail("best_restart", Value::Int(r.best_restart as i64))
            .detail("restart_values", Value::nums(&r.restarts.iter().map(|x| x.value).collect::<Vec<_>>()))
            .detail(
                "restart_iterations",
                Value::List(r.restarts.iter().map(|x| Value::Int(x.iterations as i64)).collect()),
            );
            r.settings
        }
    };
    let sub = TimeGrid::new(vec![ta, tb], dim)?;
    let op = operator_bound_check(&settings, &full.restrict(&sub)?)?;
    sec.metric(Metric::at_most("operator_bound", op, tsirelson, 1e-9));
    Ok(sec)
}

fn run_monogamy(m: &MonogamySpec) -> crate::Result<Section> {
    let grid = crate::monogamy::three_times(m.dim)?;
    let r = temporal_monogamy_search(m.dim, &grid, m.restarts, m.seed)?;
    let mut ghz = vec![C64::new(0.0, 0.0); m.dim.pow(3)];
    for i in 0..m.dim {
        ghz[i * (m.dim * m.dim + m.dim + 1)] = C64::new(1.0, 0.0);
    }
    let (g32, g21) = pair_fidelities(&ghz, m.dim);
    let mut sec = Section::new("monogamy");
    sec.metric(Metric::at_most("best_min_fidelity", r.best_min_fidelity, m.threshold, 0.0));
    if let Some(e) = m.expected {
        sec.metric(Metric::equal("regression", r.best_min_fidelity, e, m.tol));
    }
    sec.metric(Metric::info("best_f32", r.best_f32, m.tol))
        .metric(Metric::info("best_f21", r.best_f21, m.tol))
        .metric(Metric::equal("ghz_candidate", g32.min(g21), 1.0 / m.dim as f64, 1e-10))
        .detail("seed", Value::Str(m.seed.to_string()))
        .detail("restarts", Value::Int(m.restarts as i64))
        .detail("all_converged", Value::Bool(r.all_converged()))
        .detail(
            "argmax_re_im",
            Value::List(r.argmax.iter().flat_map(|z| [Value::Num(z.re), Value::Num(z.im)]).collect()),
        )
        .detail(
            "restart_records",
            Value::List(
                r.restarts
                    .iter()
                    .map(|x| {
                        Value::map([
                            ("index", Value::Int(x.index as i64)),
                            ("iterations", Value::Int(x.iterations as i64)),
                            ("value", Value::Num(x.value)),
                            ("converged", Value::Bool(x.converged)),
                            ("residual", Value::Num(x.residual)),
                            ("trajectory", Value::nums(&x.trajectory)),
                        ])
                    })
                    .collect(),
            ),
        );
    Ok(sec)
}

/// `|Ψ)` replaced by a history whose reduction is exactly `|Λ₁)(Λ₁|`, for
/// contrast with the interferometer.
pub fn factorized_variant(spec: &ScenarioSpec) -> crate::Result<ScenarioSpec> {
    let lambda1 = spec.history_spec("Lambda1")?.clone();
    let psi = spec.history_spec("Psi")?.clone();
    let extra: Vec<TimeLabel> = psi.labels.iter().copied().filter(|l| !lambda1.labels.contains(l)).collect();
    let mut labels = lambda1.labels.clone();
    labels.extend(&extra);
    labels.sort();
    let terms = lambda1
        .terms
        .iter()
        .map(|(c, ops)| {
            let slots = labels
                .iter()
                .map(|l| match lambda1.labels.iter().position(|x| x == l) {
                    Some(k) => ops[k].clone(),
                    None => "P0".to_string(),
                })
                .collect();
            (*c, slots)
        })
        .collect();
    let mut out = spec.clone();
    let slot = out.histories.iter_mut().find(|h| h.name == "Psi").expect("looked up above");
    *slot = HistorySpec { name: "Psi".into(), labels, terms };
    Ok(out)
}

/// Reduced operator helper for callers holding a spec.
pub fn reduce_named(spec: &ScenarioSpec, history: &str, trace: &[TimeLabel]) -> crate::Result<ReducedHistoryOperator> {
    let y = spec.history(history)?;
    let s = spec.schedule_for(&y)?;
    let [t] = trace else {
        return Err(Error::IncompleteBasis("single traced label expected".into()));
    };
    partial_trace(&y, trace, &TemporalBasis::matrix_units(*t, spec.grid.dim())?, &s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mach_zehnder_round_trips_and_passes() {
        let spec = build_mach_zehnder();
        assert_eq!(spec.grid.len(), 4);
        assert_eq!(spec.grid.dim(), 2);
        let text = emit(&spec);
        assert_eq!(parse_scenario(&text).unwrap(), spec);
        let report = run_scenario(&spec).unwrap();
        assert!(report.pass(), "{}", report.to_text());
        let sec = &report.sections[0];
        assert!((sec.find("arm_branch_weight").unwrap().value - 0.25).abs() < 1e-12);
        assert!((sec.find("no_extraction_fidelity_to_lambda1").unwrap().value - 0.5).abs() < 1e-9);
    }

    #[test]
    fn no_extraction_variants() {
        let spec = build_mach_zehnder();
        let sec = verify_no_extraction(&spec).unwrap();
        assert!(sec.pass());
        let fact = factorized_variant(&spec).unwrap();
        let sec = verify_no_extraction(&fact).unwrap();
        assert!((sec.find("fidelity_to_lambda1").unwrap().value - 1.0).abs() < 1e-12);
        assert!(!sec.pass());
        assert!(sec.notes.iter().any(|n| n.contains("extraction possible")));
        let mut missing = spec.clone();
        missing.histories.retain(|h| h.name != "Lambda1");
        assert_eq!(verify_no_extraction(&missing).unwrap_err(), Error::MissingHistory("Lambda1".into()));
    }

    #[test]
    fn four_branch_tree_is_consistent_and_detector_family_is_not() {
        let spec = build_mach_zehnder();
        let s = spec.schedule().unwrap();
        let tree = crate::history::check_consistency(&four_branch_family(&spec).unwrap(), &s, 1e-10).unwrap();
        assert!(tree.consistent);
        assert!((tree.total_weight() - 1.0).abs() < 1e-12);
        let det = crate::history::check_consistency(&detector_family(&spec).unwrap(), &s, 1e-10).unwrap();
        assert!((det.max_offdiag - 0.25).abs() < 1e-12);
    }

    #[test]
    fn structured_report_is_json() {
        let report = run_scenario(&build_mach_zehnder()).unwrap();
        let text = report.to_structured();
        let parsed: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(parsed["scenario"], "mach-zehnder");
        assert_eq!(parsed["pass"], true);
    }
}
