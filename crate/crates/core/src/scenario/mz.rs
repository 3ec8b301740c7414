//! Mach-Zehnder interferometer over `t0 < t1 < t2 < t3`.
//!
//! `φ0 = |0⟩` enters a Hadamard beam splitter, the arms `φ_{k,1} = |0⟩`,
//! `φ_{k,2} = |1⟩` (k = 1, 2) are joined by free propagation, and a second
//! Hadamard recombines them. The output ports are labelled so that
//! `φ_{3,2} = |0⟩` is the bright port and `φ_{3,1} = |1⟩` the dark one.

use num_complex::Complex64 as C64;

use super::report::{Metric, Section, Value};
use super::spec::*;
use crate::error::{Error, Result};
use crate::history::{check_consistency, event_probability, normalize, weight, HistoryVector, TimeLabel};
use crate::reduction::{partial_trace, purity, TemporalBasis};

const PROJECTORS: [(&str, usize); 7] =
    [("PHI0", 0), ("PHI11", 0), ("PHI12", 1), ("PHI21", 0), ("PHI22", 1), ("PHI31", 1), ("PHI32", 0)];

fn term(amp: f64, ops: &[&str]) -> (C64, Vec<String>) {
    (C64::new(amp, 0.0), ops.iter().map(|s| s.to_string()).collect())
}

/// The interferometer with its named histories `Lambda`, `Psi` and
/// `Lambda1` and an `mz-demo` analysis.
pub fn build_mach_zehnder() -> ScenarioSpec {
    let grid = crate::history::TimeGrid::sequential(0, 4, 2).expect("fixed grid");
    let operators = PROJECTORS
        .iter()
        .map(|(n, k)| (n.to_string(), crate::kernel::ComplexMatrix::basis_projector(2, *k).expect("qubit")))
        .collect();
    let l = |k: u32| TimeLabel(k);
    let g = std::f64::consts::FRAC_1_SQRT_2;
    let histories = vec![
        HistorySpec {
            name: "Lambda".into(),
            labels: vec![l(0), l(1), l(2), l(3)],
            terms: vec![term(1.0, &["PHI0", "PHI11", "I", "PHI31"]), term(1.0, &["PHI0", "PHI12", "I", "PHI32"])],
        },
        HistorySpec {
            name: "Psi".into(),
            labels: vec![l(1), l(2), l(3)],
            terms: vec![term(g, &["PHI11", "PHI21", "PHI31"]), term(g, &["PHI12", "PHI22", "PHI32"])],
        },
        HistorySpec {
            name: "Lambda1".into(),
            labels: vec![l(1), l(3)],
            terms: vec![term(g, &["PHI11", "PHI31"]), term(g, &["PHI12", "PHI32"])],
        },
    ];
    ScenarioSpec {
        name: "mach-zehnder".into(),
        grid,
        operators,
        bridges: vec![Some(BridgeSpec::Unitary("H".into())), None, Some(BridgeSpec::Unitary("H".into()))],
        histories,
        analyses: vec![AnalysisSpec::MzDemo(MzDemoSpec { tol: 1e-10 })],
    }
}

fn op(spec: &ScenarioSpec, name: &str) -> Result<crate::kernel::ComplexMatrix> {
    spec.operator(name).ok_or_else(|| Error::MissingHistory(format!("operator `{name}`")))
}

fn four_time(spec: &ScenarioSpec, slots: [&str; 4]) -> Result<HistoryVector> {
    if spec.grid.len() != 4 {
        return Err(Error::GridMismatch(format!("interferometer needs four times, got {}", spec.grid)));
    }
    let m = slots.iter().map(|n| op(spec, n)).collect::<Result<Vec<_>>>()?;
    HistoryVector::from_slot_lists(&spec.grid, vec![(C64::new(1.0, 0.0), m.into_iter().rev().collect())])
}

/// Which-arm tree `I ⊙ [φ_{2,b}] ⊙ [φ_{1,c}] ⊙ [φ0]`, `b, c ∈ {1, 2}`.
pub fn four_branch_family(spec: &ScenarioSpec) -> Result<Vec<HistoryVector>> {
    let mut out = Vec::new();
    for b in ["PHI21", "PHI22"] {
        for c in ["PHI11", "PHI12"] {
            out.push(four_time(spec, ["PHI0", c, b, "I"])?);
        }
    }
    Ok(out)
}

/// Detector-resolved paths `[φ_{3,a}] ⊙ [φ_{2,b}] ⊙ [φ_{1,b}] ⊙ [φ0]`; the
/// two arms interfere, so this family is not consistent.
pub fn detector_family(spec: &ScenarioSpec) -> Result<Vec<HistoryVector>> {
    let mut out = Vec::new();
    for a in ["PHI31", "PHI32"] {
        for (b2, b1) in [("PHI21", "PHI11"), ("PHI22", "PHI12")] {
            out.push(four_time(spec, ["PHI0", b1, b2, a])?);
        }
    }
    Ok(out)
}

/// `[φ_{3,2}] ⊙ [φ_{2,1}] ⊙ [φ_{1,1}] ⊙ [φ0]`.
pub fn arm_branch(spec: &ScenarioSpec) -> Result<HistoryVector> {
    four_time(spec, ["PHI0", "PHI11", "PHI21", "PHI32"])
}

/// Fidelity of `Tr_{traced}|Ψ)(Ψ|` to `|Λ₁)(Λ₁|` and its purity; passes
/// when both stay at or below 1/2, i.e. `|Λ₁)` cannot be extracted.
pub fn verify_no_extraction(spec: &ScenarioSpec) -> Result<Section> {
    verify_no_extraction_tol(spec, 1e-9)
}

pub fn verify_no_extraction_tol(spec: &ScenarioSpec, tol: f64) -> Result<Section> {
    let psi = spec.history("Psi")?;
    let lambda1 = spec.history("Lambda1")?;
    let s = spec.schedule_for(&psi)?;
    let traced: Vec<TimeLabel> = psi.grid().labels().iter().copied().filter(|l| !lambda1.grid().contains(*l)).collect();
    let [t] = traced.as_slice() else {
        return Err(Error::GridMismatch(format!(
            "Lambda1 on {} must drop exactly one label of Psi on {}",
            lambda1.grid(),
            psi.grid()
        )));
    };
    let basis = TemporalBasis::matrix_units(*t, spec.grid.dim())?;
    let rho = partial_trace(&psi, &traced, &basis, &s)?;
    let fid = rho.fidelity_to_pure(&lambda1)?;
    let pur = purity(&rho)?;
    let mut sec = Section::new("no-extraction");
    sec.metric(Metric::at_most("fidelity_to_lambda1", fid, 0.5, tol))
        .metric(Metric::at_most("purity", pur, 0.5, tol))
        .detail("traced", Value::Str(t.to_string()));
    if fid > 0.5 + tol {
        sec.note("extraction possible: the reduction overlaps Lambda1 beyond 1/2");
    }
    for w in rho.warnings() {
        sec.note(w.clone());
    }
    Ok(sec)
}

/// Consistency of the which-arm tree, arm weight, output probability, the
/// normalized weight of `|Λ)` and the no-extraction check.
pub fn mz_demo(spec: &ScenarioSpec, tol: f64) -> Result<Section> {
    let s = spec.schedule()?;
    let mut sec = Section::new("mz-demo");

    let tree = check_consistency(&four_branch_family(spec)?, &s, tol)?;
    sec.metric(Metric::at_most("four_branch_max_offdiag", tree.max_offdiag, 0.0, tol))
        .metric(Metric::equal("four_branch_total_weight", tree.total_weight(), 1.0, tol))
        .detail("four_branch_weights", Value::nums(&tree.diagonal));

    let arm = weight(&arm_branch(spec)?, &s)?;
    sec.metric(Metric::equal("arm_branch_weight", arm, 0.25, 1e-12));

    let psi0 = op(spec, "PHI0")?;
    let bright = event_probability(&op(spec, "PHI32")?, spec.grid.last(), &s, &psi0, 1e-10)?;
    sec.metric(Metric::equal("output_phi32_probability", bright, 1.0, 1e-12));

    let lambda = spec.history("Lambda")?;
    let ls = spec.schedule_for(&lambda)?;
    let raw = weight(&lambda, &ls)?;
    let normalized = weight(&normalize(&lambda, &ls, 1e-14)?, &ls)?;
    sec.metric(Metric::info("lambda_raw_weight", raw, tol)).metric(Metric::equal(
        "lambda_normalized_weight",
        normalized,
        1.0,
        tol,
    ));

    let det = check_consistency(&detector_family(spec)?, &s, tol)?;
    sec.metric(Metric::info("detector_family_max_offdiag", det.max_offdiag, tol))
        .note("detector-resolved family interferes and is reported for information only");

    let ne = verify_no_extraction_tol(spec, 1e-9)?;
    for m in ne.metrics {
        sec.metric(Metric { name: format!("no_extraction_{}", m.name), ..m });
    }
    sec.notes.extend(ne.notes);
    Ok(sec)
}
