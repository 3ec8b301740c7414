//! The `⊙` algebra of histories and the physical quantities attached to a
//! history through its bridging schedule: chain operators, the semi-definite
//! inner product, weights, event probabilities and the consistency check.

mod grid;
mod schedule;
mod vector;

use num_complex::Complex64 as C64;

pub use grid::{TimeGrid, TimeLabel};
pub use schedule::BridgingSchedule;
pub use vector::{odot, ElementaryHistory, HistoryVector};

use crate::error::{Error, Result};
use crate::kernel::{hermitian_eig, ComplexMatrix, ONE};

/// Largest Kronecker dimension for which the completeness identity is
/// evaluated.
const COMPLETENESS_MAX_DIM: usize = 1024;

/// `K = P_n B(t_n,t_{n−1}) P_{n−1} … B(t_1,t_0) P_0`, extended linearly over
/// the terms of `h`.
pub fn chain_operator(h: &HistoryVector, s: &BridgingSchedule) -> Result<ComplexMatrix> {
    h.grid().ensure_same(s.grid())?;
    let mut acc = ComplexMatrix::zeros(h.grid().dim());
    for (amp, e) in h.terms() {
        acc = &acc + &elementary_chain(e, s).scale(*amp);
    }
    Ok(acc)
}

fn elementary_chain(e: &ElementaryHistory, s: &BridgingSchedule) -> ComplexMatrix {
    let slots = e.slots_earliest_first();
    let mut k = slots[0].clone();
    for (slot, bridge) in slots[1..].iter().zip(s.adjacent()) {
        k = &(slot * bridge) * &k;
    }
    k
}

/// `(a|b) = Tr[K(a)† K(b)]`.
pub fn inner_product(a: &HistoryVector, b: &HistoryVector, s: &BridgingSchedule) -> Result<C64> {
    a.grid().ensure_same(b.grid())?;
    chain_operator(a, s)?.frobenius_inner(&chain_operator(b, s)?)
}

/// `W(h) = Tr[K(h)† K(h)]`.
pub fn weight(h: &HistoryVector, s: &BridgingSchedule) -> Result<f64> {
    let k = chain_operator(h, s)?;
    Ok(k.frobenius_norm().powi(2))
}

/// `h / √W(h)`; fails when the weight does not exceed `tol`.
pub fn normalize(h: &HistoryVector, s: &BridgingSchedule, tol: f64) -> Result<HistoryVector> {
    let w = weight(h, s)?;
    if w <= tol {
        return Err(Error::ZeroWeightHistory(w));
    }
    Ok(h.scale(C64::new(1.0 / w.sqrt(), 0.0)))
}

/// Born-rule probability `Tr(B†(t,t_0) P B(t,t_0) ρ_0)` that the property
/// `p` holds at `t`, with `ρ_0` the state at the first grid label.
pub fn event_probability(
    p: &ComplexMatrix,
    t: TimeLabel,
    s: &BridgingSchedule,
    psi0: &ComplexMatrix,
    tol: f64,
) -> Result<f64> {
    let defect = p.projector_defect();
    if defect > tol {
        return Err(Error::NotProjector(defect));
    }
    psi0.check_density(tol)?;
    if p.dim() != s.grid().dim() || psi0.dim() != s.grid().dim() {
        return Err(Error::DimensionMismatch(format!(
            "projector {}, state {}, grid {}",
            p.dim(),
            psi0.dim(),
            s.grid().dim()
        )));
    }
    let b = s.bridge(t, s.grid().first())?;
    let heis = &(&b.adjoint() * p) * &b;
    Ok((&heis * psi0).trace().re)
}

/// Outcome of the completeness identity `Σ c_α |H^α) = I ⊙ … ⊙ I`.
#[derive(Debug, Clone, PartialEq)]
pub enum Completeness {
    /// Not evaluated, with the reason.
    NotChecked(String),
    Checked {
        /// Frobenius residual of `Σ c_α ⊗_t P_t^α − I`.
        residual: f64,
        complete: bool,
        /// When every member starts from the same initial slot `P_0`, the
        /// residual of `Σ c_α ⊗_{t>t_0} P_t^α − I` (completeness of a tree
        /// rooted at `P_0`).
        rooted_residual: Option<f64>,
        rooted_complete: Option<bool>,
    },
}

/// Decoherence functional of a family and the verdicts derived from it.
#[derive(Debug, Clone)]
pub struct DecoherenceReport {
    pub gram: ComplexMatrix,
    /// Weights `(H^α|H^α)`; probabilities when the family is projective.
    pub diagonal: Vec<f64>,
    pub max_offdiag: f64,
    pub tolerance: f64,
    pub consistent: bool,
    /// Every member is an elementary history of projectors, so the diagonal
    /// carries a probability interpretation.
    pub projective: bool,
    pub completeness: Completeness,
}

impl DecoherenceReport {
    pub fn total_weight(&self) -> f64 {
        self.diagonal.iter().sum()
    }
}

/// Gram matrix of pairwise history inner products; the family is consistent
/// when every off-diagonal magnitude is at most `tol`.
pub fn check_consistency(family: &[HistoryVector], s: &BridgingSchedule, tol: f64) -> Result<DecoherenceReport> {
    check_consistency_with(family, s, tol, None)
}

/// As [`check_consistency`], with explicit coefficients `c_α` for the
/// completeness identity (default all ones).
pub fn check_consistency_with(
    family: &[HistoryVector],
    s: &BridgingSchedule,
    tol: f64,
    coefficients: Option<&[C64]>,
) -> Result<DecoherenceReport> {
    if family.is_empty() {
        return Err(Error::BadDimension("empty history family".into()));
    }
    if let Some(c) = coefficients {
        if c.len() != family.len() {
            return Err(Error::BadDimension(format!("{} coefficients for {} histories", c.len(), family.len())));
        }
    }
    let chains = family.iter().map(|h| chain_operator(h, s)).collect::<Result<Vec<_>>>()?;
    let n = family.len();
    let mut gram = ComplexMatrix::zeros(n);
    let mut max_offdiag = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let v = chains[i].frobenius_inner(&chains[j])?;
            gram.set(i, j, v);
            if i != j {
                max_offdiag = max_offdiag.max(v.norm());
            }
        }
    }
    let diagonal = (0..n).map(|i| gram.get(i, i).re).collect();
    let projective = family.iter().all(|h| h.is_elementary() && h.is_projective());
    let completeness = if projective {
        completeness(family, coefficients, tol)
    } else {
        Completeness::NotChecked("family contains superposed or non-projective histories".into())
    };
    Ok(DecoherenceReport {
        gram,
        diagonal,
        max_offdiag,
        tolerance: tol,
        consistent: max_offdiag <= tol,
        projective,
        completeness,
    })
}

fn completeness(family: &[HistoryVector], coefficients: Option<&[C64]>, tol: f64) -> Completeness {
    let grid = family[0].grid();
    let total = grid.dim().checked_pow(grid.len() as u32);
    if total.is_none_or(|t| t > COMPLETENESS_MAX_DIM) {
        return Completeness::NotChecked(format!("tensor dimension exceeds {COMPLETENESS_MAX_DIM}"));
    }
    let coef = |i: usize| coefficients.map_or(ONE, |c| c[i]);
    let elementary: Vec<(C64, &ElementaryHistory)> = family
        .iter()
        .map(|h| {
            let (a, e) = &h.terms()[0];
            (*a, e)
        })
        .collect();

    let sum_of = |skip_first: bool| -> ComplexMatrix {
        let mut acc: Option<ComplexMatrix> = None;
        for (i, (amp, e)) in elementary.iter().enumerate() {
            let slots = e.slots_earliest_first();
            let slots = if skip_first { &slots[1..] } else { slots };
            let mut it = slots.iter().rev();
            let first = it.next().expect("non-empty").clone();
            let m = it.fold(first, |acc, s| acc.kron(s)).scale(coef(i) * amp);
            acc = Some(match acc {
                None => m,
                Some(a) => &a + &m,
            });
        }
        acc.expect("non-empty family")
    };

    let full = sum_of(false);
    let residual = full.distance(&ComplexMatrix::identity(full.dim())).unwrap_or(f64::INFINITY);

    let first_slot = elementary[0].1.slots_earliest_first()[0].clone();
    let rooted = grid.len() >= 2
        && elementary.iter().all(|(_, e)| e.slots_earliest_first()[0].distance(&first_slot).is_ok_and(|d| d <= tol));
    let rooted_residual = rooted.then(|| {
        let m = sum_of(true);
        m.distance(&ComplexMatrix::identity(m.dim())).unwrap_or(f64::INFINITY)
    });
    Completeness::Checked {
        residual,
        complete: residual <= tol,
        rooted_residual,
        rooted_complete: rooted_residual.map(|r| r <= tol),
    }
}

/// Smallest eigenvalue of a Gram matrix (positivity diagnostics).
pub fn gram_min_eigenvalue(gram: &ComplexMatrix, tol: f64) -> Result<f64> {
    let eig = hermitian_eig(&gram.hermitian_part(), tol.max(gram.hermiticity_defect()))?;
    Ok(*eig.values.last().expect("non-empty"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::gates::*;
    use crate::kernel::ZERO;

    fn proj(k: usize) -> ComplexMatrix {
        ComplexMatrix::basis_projector(2, k).unwrap()
    }

    fn mz_schedule() -> BridgingSchedule {
        let grid = TimeGrid::sequential(0, 4, 2).unwrap();
        BridgingSchedule::new(grid, vec![hadamard(), ComplexMatrix::identity(2), hadamard()], 1e-12).unwrap()
    }

    fn four_slot(latest_first: [usize; 3]) -> HistoryVector {
        let grid = TimeGrid::sequential(0, 4, 2).unwrap();
        let slots = vec![proj(latest_first[0]), proj(latest_first[1]), proj(latest_first[2]), proj(0)];
        ElementaryHistory::projective(grid, slots, 1e-12).unwrap().into()
    }

    #[test]
    fn chain_operator_trivial_cases() {
        let grid = TimeGrid::sequential(0, 3, 2).unwrap();
        let id = HistoryVector::from(ElementaryHistory::identity(grid.clone()));
        let k = chain_operator(&id, &BridgingSchedule::identity(grid)).unwrap();
        assert_eq!(k, ComplexMatrix::identity(2));

        let psi = ComplexMatrix::projector_onto(&[ONE, C64::new(0.0, 1.0)]).unwrap();
        let single: HistoryVector = ElementaryHistory::single(TimeLabel(0), psi.clone()).unwrap().into();
        let s = BridgingSchedule::identity(single.grid().clone());
        assert_eq!(chain_operator(&single, &s).unwrap(), psi);
    }

    #[test]
    fn mach_zehnder_arm_branch_weight() {
        // Amplitude oracle: ⟨0|H|0⟩·⟨0|0⟩·⟨0|H|0⟩ = 1/2, so W = 1/4.
        let h = four_slot([0, 0, 0]);
        let w = weight(&h, &mz_schedule()).unwrap();
        assert!((w - 0.25).abs() < 1e-15);
    }

    #[test]
    fn orthogonal_branches_and_sesquilinearity() {
        let s = mz_schedule();
        let a = four_slot([0, 0, 0]);
        let b = four_slot([1, 1, 1]);
        // Different final detector states: chain operators have disjoint ranges.
        assert!(inner_product(&a, &b, &s).unwrap().norm() < 1e-15);
        let c = four_slot([0, 1, 1]);
        let ab = inner_product(&a, &c, &s).unwrap();
        let ba = inner_product(&c, &a, &s).unwrap();
        assert!((ab - ba.conj()).norm() < 1e-15);
    }

    #[test]
    fn dynamically_impossible_history() {
        // Arm 0 at t1 then arm 1 at t2 under an identity bridge.
        let h = four_slot([0, 1, 0]);
        let s = mz_schedule();
        assert_eq!(weight(&h, &s).unwrap(), 0.0);
        assert!(matches!(normalize(&h, &s, 1e-12), Err(Error::ZeroWeightHistory(_))));
    }

    #[test]
    fn identity_history_weight_is_dimension() {
        let grid = TimeGrid::sequential(0, 3, 3).unwrap();
        let id = HistoryVector::from(ElementaryHistory::identity(grid.clone()));
        assert!((weight(&id, &BridgingSchedule::identity(grid)).unwrap() - 3.0).abs() < 1e-15);
    }

    #[test]
    fn normalize_scales_ray() {
        let s = mz_schedule();
        let h = four_slot([0, 0, 0]).scale(C64::new(2.0, 0.0));
        let n = normalize(&h, &s, 1e-12).unwrap();
        assert!((weight(&n, &s).unwrap() - 1.0).abs() < 1e-12);
        let again = normalize(&n, &s, 1e-12).unwrap();
        assert!((again.terms()[0].0 - n.terms()[0].0).norm() < 1e-12);
    }

    #[test]
    fn event_probabilities() {
        let s = mz_schedule();
        let phi0 = proj(0);
        let t1 = TimeLabel(1);
        assert!((event_probability(&ComplexMatrix::identity(2), t1, &s, &phi0, 1e-12).unwrap() - 1.0).abs() < 1e-12);
        assert!((event_probability(&proj(0), t1, &s, &phi0, 1e-12).unwrap() - 0.5).abs() < 1e-12);
        // After both beam splitters the state is |0⟩ again.
        assert!(event_probability(&proj(1), TimeLabel(3), &s, &phi0, 1e-12).unwrap().abs() < 1e-12);
        assert!(matches!(event_probability(&pauli_x(), t1, &s, &phi0, 1e-12), Err(Error::NotProjector(_))));
        assert!(matches!(event_probability(&proj(0), t1, &s, &pauli_z(), 1e-12), Err(Error::NotDensity(_))));
    }

    #[test]
    fn duplicated_history_is_inconsistent() {
        let s = mz_schedule();
        let h = normalize(&four_slot([0, 0, 0]), &s, 1e-12).unwrap();
        let r = check_consistency(&[h.clone(), h.clone()], &s, 1e-10).unwrap();
        assert!((r.max_offdiag - 1.0).abs() < 1e-12);
        assert!(!r.consistent);
        let r = check_consistency(&[h], &s, 1e-10).unwrap();
        assert!(r.consistent);
    }

    #[test]
    fn product_family_is_complete() {
        let grid = TimeGrid::sequential(0, 2, 2).unwrap();
        let s = BridgingSchedule::identity(grid.clone());
        let family: Vec<HistoryVector> = [(0, 0), (0, 1), (1, 0), (1, 1)]
            .iter()
            .map(|&(a, b)| ElementaryHistory::projective(grid.clone(), vec![proj(a), proj(b)], 1e-12).unwrap().into())
            .collect();
        let r = check_consistency(&family, &s, 1e-10).unwrap();
        assert!(r.consistent);
        match r.completeness {
            Completeness::Checked { complete, .. } => assert!(complete),
            other => panic!("unexpected {other:?}"),
        }
        // Halving every coefficient breaks the identity.
        let half = vec![C64::new(0.5, 0.0); 4];
        let r = check_consistency_with(&family, &s, 1e-10, Some(&half)).unwrap();
        assert!(matches!(r.completeness, Completeness::Checked { complete: false, .. }));
    }

    #[test]
    fn superposed_family_skips_completeness() {
        let grid = TimeGrid::sequential(0, 1, 2).unwrap();
        let s = BridgingSchedule::identity(grid.clone());
        let a = ElementaryHistory::from_latest_first(grid.clone(), vec![proj(0)]).unwrap();
        let b = ElementaryHistory::from_latest_first(grid.clone(), vec![proj(1)]).unwrap();
        let sup = HistoryVector::new(grid, vec![(ONE, a), (ONE, b)]).unwrap();
        let r = check_consistency(&[sup], &s, 1e-10).unwrap();
        assert!(matches!(r.completeness, Completeness::NotChecked(_)));
        assert_ne!(r.gram.get(0, 0), ZERO);
    }
}
