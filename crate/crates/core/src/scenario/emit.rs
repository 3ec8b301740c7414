use std::fmt::Write;

use num_complex::Complex64 as C64;

use super::spec::*;

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_real(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn fmt_complex(z: C64) -> String {
    format!("{:.16e}{:+.16e}i", z.re, z.im)
}

fn labels(ls: &[crate::history::TimeLabel]) -> String {
    ls.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(" ")
}

/// Canonical text of a scenario; parsing it yields an equal spec.
pub fn emit(spec: &ScenarioSpec) -> String {
    let mut out = String::new();
    let w = &mut out;
    let _ = writeln!(w, "scenario = {}", spec.name);
    let _ = writeln!(w, "format = {FORMAT_VERSION}");
    let _ = writeln!(w, "\ngrid {{\n  labels = {}\n  dim = {}\n}}", labels(spec.grid.labels()), spec.grid.dim());

    for (name, m) in &spec.operators {
        let _ = writeln!(w, "\noperator {name} {{");
        for row in m.rows() {
            let cells: Vec<String> = row.into_iter().map(fmt_complex).collect();
            let _ = writeln!(w, "  row = {}", cells.join(" "));
        }
        let _ = writeln!(w, "}}");
    }

    if spec.bridges.iter().any(Option::is_some) {
        let _ = writeln!(w, "\nbridges {{");
        for (pair, b) in spec.grid.labels().windows(2).zip(&spec.bridges) {
            match b {
                None => {}
                Some(BridgeSpec::Unitary(n)) => {
                    let _ = writeln!(w, "  {}-{} = unitary {n}", pair[0], pair[1]);
                }
                Some(BridgeSpec::Hamiltonian { operator, duration }) => {
                    let _ = writeln!(
                        w,
                        "  {}-{} = hamiltonian {operator} duration {}",
                        pair[0],
                        pair[1],
                        fmt_real(*duration)
                    );
                }
            }
        }
        let _ = writeln!(w, "}}");
    }

    for h in &spec.histories {
        let _ = writeln!(w, "\nhistory {} {{", h.name);
        for (amp, ops) in &h.terms {
            let slots: Vec<String> = h.labels.iter().zip(ops).rev().map(|(l, o)| format!("{l}:{o}")).collect();
            let _ = writeln!(w, "  term = {} {}", fmt_complex(*amp), slots.join(" "));
        }
        let _ = writeln!(w, "}}");
    }

    for a in &spec.analyses {
        let _ = writeln!(w, "\nanalysis {} {{", a.kind());
        match a {
            AnalysisSpec::Consistency(c) => {
                let _ = writeln!(w, "  histories = {}", c.histories.join(" "));
                if let Some(cs) = &c.coefficients {
                    let cs: Vec<String> = cs.iter().map(|z| fmt_complex(*z)).collect();
                    let _ = writeln!(w, "  coefficients = {}", cs.join(" "));
                }
            }
            AnalysisSpec::Reduce(r) => {
                let _ = writeln!(w, "  history = {}", r.history);
                let _ = writeln!(w, "  trace = {}", labels(&r.trace));
                let basis = match &r.basis {
                    BasisSpec::MatrixUnits => "matrix-units".to_string(),
                    BasisSpec::Computational => "computational".to_string(),
                    BasisSpec::Histories(ns) => ns.join(" "),
                };
                let _ = writeln!(w, "  basis = {basis}");
                if let Some(t) = &r.target {
                    let _ = writeln!(w, "  target = {t}");
                }
                if let Some(p) = r.expect_purity {
                    let _ = writeln!(w, "  expect_purity = {}", fmt_real(p));
                }
                if let Some(p) = r.expect_fidelity {
                    let _ = writeln!(w, "  expect_fidelity = {}", fmt_real(p));
                }
            }
            AnalysisSpec::Lgi(l) => {
                match &l.mode {
                    LgiMode::Settings(ns) => {
                        let _ = writeln!(w, "  mode = settings");
                        for (k, n) in ["a1", "a2", "b1", "b2"].iter().zip(ns) {
                            let _ = writeln!(w, "  {k} = {n}");
                        }
                    }
                    LgiMode::Seesaw { restarts, seed, optimize_state, restrict_diagonal } => {
                        let _ = writeln!(w, "  mode = seesaw");
                        let _ = writeln!(w, "  restarts = {restarts}");
                        let _ = writeln!(w, "  seed = {seed}");
                        let _ = writeln!(w, "  optimize_state = {optimize_state}");
                        let _ = writeln!(w, "  restrict_diagonal = {restrict_diagonal}");
                    }
                }
                if let Some((a, b)) = l.at {
                    let _ = writeln!(w, "  at = {a} {b}");
                }
                if let Some(r) = &l.rho {
                    let _ = writeln!(w, "  rho = {r}");
                }
                if let Some(e) = l.expected {
                    let _ = writeln!(w, "  expected = {}", fmt_real(e));
                }
            }
            AnalysisSpec::Monogamy(m) => {
                let _ = writeln!(w, "  dim = {}", m.dim);
                let _ = writeln!(w, "  restarts = {}", m.restarts);
                let _ = writeln!(w, "  seed = {}", m.seed);
                let _ = writeln!(w, "  threshold = {}", fmt_real(m.threshold));
                if let Some(e) = m.expected {
                    let _ = writeln!(w, "  expected = {}", fmt_real(e));
                }
            }
            AnalysisSpec::MzDemo(_) => {}
        }
        let _ = writeln!(w, "  tol = {}", fmt_real(a.tol()));
        let _ = writeln!(w, "}}");
    }
    out
}
