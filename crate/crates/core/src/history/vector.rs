use num_complex::Complex64 as C64;

use super::grid::{TimeGrid, TimeLabel};
use crate::error::{Error, Result};
use crate::kernel::{ComplexMatrix, ONE, ZERO};

/// One operator per time label: `P_n ⊙ … ⊙ P_0`.
///
/// Slots are stored earliest-first, aligned with the grid labels. The public
/// constructors take them latest-first to match the written order.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementaryHistory {
    grid: TimeGrid,
    slots: Vec<ComplexMatrix>,
    projective: bool,
}

impl ElementaryHistory {
    /// Slots given latest-first. No projector validation is done; the
    /// history is marked projective only if every slot happens to be a
    /// projector within `1e-10`.
    pub fn from_latest_first(grid: TimeGrid, latest_first: Vec<ComplexMatrix>) -> Result<Self> {
        let mut slots = latest_first;
        slots.reverse();
        Self::from_earliest_first(grid, slots)
    }

    /// Like [`Self::from_latest_first`] but every slot must be a projector
    /// within `tol`.
    pub fn projective(grid: TimeGrid, latest_first: Vec<ComplexMatrix>, tol: f64) -> Result<Self> {
        for slot in &latest_first {
            let defect = slot.projector_defect();
            if defect > tol {
                return Err(Error::NotProjector(defect));
            }
        }
        let mut h = Self::from_latest_first(grid, latest_first)?;
        h.projective = true;
        Ok(h)
    }

    pub fn from_earliest_first(grid: TimeGrid, slots: Vec<ComplexMatrix>) -> Result<Self> {
        if slots.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} slots for grid {grid} with {} labels",
                slots.len(),
                grid.len()
            )));
        }
        for (slot, label) in slots.iter().zip(grid.labels()) {
            if slot.dim() != grid.dim() {
                return Err(Error::DimensionMismatch(format!(
                    "slot at {label} is {}x{}, grid slot dimension is {}",
                    slot.dim(),
                    slot.dim(),
                    grid.dim()
                )));
            }
            if !slot.is_finite() {
                return Err(Error::NonFinite);
            }
        }
        let projective = slots.iter().all(|s| s.is_projector(1e-10));
        Ok(Self { grid, slots, projective })
    }

    /// Single-time history.
    pub fn single(label: TimeLabel, slot: ComplexMatrix) -> Result<Self> {
        let grid = TimeGrid::new(vec![label], slot.dim())?;
        Self::from_earliest_first(grid, vec![slot])
    }

    /// `I ⊙ … ⊙ I`.
    pub fn identity(grid: TimeGrid) -> Self {
        let slots = vec![ComplexMatrix::identity(grid.dim()); grid.len()];
        Self { grid, slots, projective: true }
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn is_projective(&self) -> bool {
        self.projective
    }

    pub fn slots_earliest_first(&self) -> &[ComplexMatrix] {
        &self.slots
    }

    pub fn slot(&self, label: TimeLabel) -> Result<&ComplexMatrix> {
        let k = self.grid.require(label)?;
        Ok(&self.slots[k])
    }

    /// Slot-wise Hilbert–Schmidt product `Π_t Tr(a_t† b_t)`.
    pub fn tensor_inner(&self, other: &Self) -> Result<C64> {
        self.grid.ensure_same(&other.grid)?;
        let mut acc = ONE;
        for (a, b) in self.slots.iter().zip(&other.slots) {
            acc *= a.frobenius_inner(b)?;
            if acc == ZERO {
                break;
            }
        }
        Ok(acc)
    }

    /// Sub-history on the given labels (in grid order).
    pub fn restrict(&self, labels: &[TimeLabel]) -> Result<Self> {
        let grid = self.grid.sub_grid(labels)?;
        let slots = grid.labels().iter().map(|l| self.slot(*l).cloned()).collect::<Result<Vec<_>>>()?;
        Ok(Self { projective: slots.iter().all(|s| s.is_projector(1e-10)), grid, slots })
    }

    /// `self ⊙ earlier` on the concatenated grid.
    pub fn odot(&self, earlier: &Self) -> Result<Self> {
        let grid = concat_grids(&self.grid, &earlier.grid)?;
        let mut slots = earlier.slots.clone();
        slots.extend(self.slots.iter().cloned());
        Ok(Self { grid, slots, projective: self.projective && earlier.projective })
    }

    /// Replaces the slot at `label`.
    pub fn with_slot(&self, label: TimeLabel, slot: ComplexMatrix) -> Result<Self> {
        let k = self.grid.require(label)?;
        if slot.dim() != self.grid.dim() {
            return Err(Error::DimensionMismatch(format!("slot {} vs grid dimension {}", slot.dim(), self.grid.dim())));
        }
        let mut slots = self.slots.clone();
        slots[k] = slot;
        Ok(Self { projective: slots.iter().all(|s| s.is_projector(1e-10)), grid: self.grid.clone(), slots })
    }

    /// Kronecker product of the slots, latest factor first.
    pub fn tensor_matrix(&self) -> ComplexMatrix {
        let mut it = self.slots.iter().rev();
        let first = it.next().expect("grid has at least one label").clone();
        it.fold(first, |acc, s| acc.kron(s))
    }
}

fn concat_grids(later: &TimeGrid, earlier: &TimeGrid) -> Result<TimeGrid> {
    if later.dim() != earlier.dim() {
        return Err(Error::DimensionMismatch(format!("slot dimensions {} and {}", later.dim(), earlier.dim())));
    }
    if earlier.last() >= later.first() {
        return Err(Error::OverlappingGrids(format!("earlier grid {earlier} does not precede later grid {later}")));
    }
    let mut labels = earlier.labels().to_vec();
    labels.extend_from_slice(later.labels());
    TimeGrid::new(labels, later.dim())
}

/// Complex-weighted sum of elementary histories on one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct HistoryVector {
    grid: TimeGrid,
    terms: Vec<(C64, ElementaryHistory)>,
}

impl HistoryVector {
    /// Terms with exactly zero amplitude are dropped.
    pub fn new(grid: TimeGrid, terms: Vec<(C64, ElementaryHistory)>) -> Result<Self> {
        for (amp, h) in &terms {
            grid.ensure_same(h.grid())?;
            if !(amp.re.is_finite() && amp.im.is_finite()) {
                return Err(Error::NonFinite);
            }
        }
        let terms = terms.into_iter().filter(|(a, _)| *a != ZERO).collect();
        Ok(Self { grid, terms })
    }

    pub fn zero(grid: TimeGrid) -> Self {
        Self { grid, terms: Vec::new() }
    }

    /// Builds from `(amplitude, latest-first slots)` pairs.
    pub fn from_slot_lists(grid: &TimeGrid, terms: Vec<(C64, Vec<ComplexMatrix>)>) -> Result<Self> {
        let terms = terms
            .into_iter()
            .map(|(a, slots)| Ok((a, ElementaryHistory::from_latest_first(grid.clone(), slots)?)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(grid.clone(), terms)
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn terms(&self) -> &[(C64, ElementaryHistory)] {
        &self.terms
    }

    pub fn is_elementary(&self) -> bool {
        self.terms.len() == 1
    }

    /// True when every term has projector slots.
    pub fn is_projective(&self) -> bool {
        self.terms.iter().all(|(_, h)| h.is_projective())
    }

    pub fn scale(&self, s: C64) -> Self {
        let terms = self.terms.iter().map(|(a, h)| (a * s, h.clone())).filter(|(a, _)| *a != ZERO).collect();
        Self { grid: self.grid.clone(), terms }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.grid.ensure_same(&other.grid)?;
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Ok(Self { grid: self.grid.clone(), terms })
    }

    /// `Σ c_i v_i` over vectors sharing a grid.
    pub fn linear_combination(grid: &TimeGrid, parts: &[(C64, &HistoryVector)]) -> Result<Self> {
        let mut terms = Vec::new();
        for (c, v) in parts {
            grid.ensure_same(&v.grid)?;
            terms.extend(v.terms.iter().map(|(a, h)| (a * c, h.clone())));
        }
        Self::new(grid.clone(), terms)
    }

    /// `self ⊙ earlier`: bilinear, all pairwise amplitude products.
    pub fn odot(&self, earlier: &Self) -> Result<Self> {
        let grid = concat_grids(&self.grid, &earlier.grid)?;
        let mut terms = Vec::with_capacity(self.terms.len() * earlier.terms.len());
        for (a, ha) in &self.terms {
            for (b, hb) in &earlier.terms {
                terms.push((a * b, ha.odot(hb)?));
            }
        }
        Self::new(grid, terms)
    }

    /// Sesquilinear slot-wise Hilbert–Schmidt product. This is the geometry
    /// used by temporal reductions; the bridged (chain) product lives in
    /// [`super::inner_product`].
    pub fn tensor_inner(&self, other: &Self) -> Result<C64> {
        self.grid.ensure_same(&other.grid)?;
        let mut acc = ZERO;
        for (a, ha) in &self.terms {
            for (b, hb) in &other.terms {
                acc += a.conj() * b * ha.tensor_inner(hb)?;
            }
        }
        Ok(acc)
    }

    pub fn tensor_norm_sq(&self) -> f64 {
        self.tensor_inner(self).map(|z| z.re).unwrap_or(0.0)
    }

    /// Dense coordinates in the product matrix-unit basis (latest slot most
    /// significant). Only meant for small grids.
    pub fn tensor_matrix(&self) -> ComplexMatrix {
        let d = self.grid.dim().pow(self.grid.len() as u32);
        let mut acc = ComplexMatrix::zeros(d);
        for (a, h) in &self.terms {
            acc = &acc + &h.tensor_matrix().scale(*a);
        }
        acc
    }
}

impl From<ElementaryHistory> for HistoryVector {
    fn from(h: ElementaryHistory) -> Self {
        Self { grid: h.grid().clone(), terms: vec![(ONE, h)] }
    }
}

/// `a ⊙ b` for history vectors; `a` lives on the later times.
pub fn odot(a: &HistoryVector, b: &HistoryVector) -> Result<HistoryVector> {
    a.odot(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::gates::*;

    fn proj(k: usize) -> ComplexMatrix {
        ComplexMatrix::basis_projector(2, k).unwrap()
    }

    fn single(t: u32, m: ComplexMatrix) -> HistoryVector {
        ElementaryHistory::single(TimeLabel(t), m).unwrap().into()
    }

    #[test]
    fn odot_builds_two_slot_history() {
        let h = single(1, proj(1)).odot(&single(0, proj(0))).unwrap();
        assert_eq!(h.grid().labels(), &[TimeLabel(0), TimeLabel(1)]);
        let (_, e) = &h.terms()[0];
        assert_eq!(e.slot(TimeLabel(1)).unwrap(), &proj(1));
        assert_eq!(e.slot(TimeLabel(0)).unwrap(), &proj(0));
        assert!(e.is_projective());
    }

    #[test]
    fn odot_is_bilinear() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let later = HistoryVector::linear_combination(
            &TimeGrid::new(vec![TimeLabel(1)], 2).unwrap(),
            &[(C64::new(s, 0.0), &single(1, proj(0))), (C64::new(s, 0.0), &single(1, proj(1)))],
        )
        .unwrap();
        let f = single(0, hadamard());
        let lhs = later.odot(&f).unwrap();
        let rhs = HistoryVector::linear_combination(
            &TimeGrid::new(vec![TimeLabel(0), TimeLabel(1)], 2).unwrap(),
            &[
                (C64::new(s, 0.0), &single(1, proj(0)).odot(&f).unwrap()),
                (C64::new(s, 0.0), &single(1, proj(1)).odot(&f).unwrap()),
            ],
        )
        .unwrap();
        assert!(lhs.tensor_matrix().distance(&rhs.tensor_matrix()).unwrap() < 1e-15);
    }

    #[test]
    fn odot_rejects_overlap_and_interleaving() {
        let a = single(1, proj(0));
        let b = single(1, proj(1));
        assert!(matches!(a.odot(&b), Err(Error::OverlappingGrids(_))));
        let later = single(2, proj(0)).odot(&single(0, proj(0))).unwrap();
        assert!(matches!(later.odot(&single(1, proj(0))), Err(Error::OverlappingGrids(_))));
        assert!(matches!(single(0, proj(0)).odot(&single(1, proj(0))), Err(Error::OverlappingGrids(_))));
    }

    #[test]
    fn zero_amplitudes_are_pruned() {
        let g = TimeGrid::new(vec![TimeLabel(0)], 2).unwrap();
        let e = ElementaryHistory::single(TimeLabel(0), proj(0)).unwrap();
        let v = HistoryVector::new(g, vec![(ZERO, e.clone()), (ONE, e)]).unwrap();
        assert_eq!(v.terms().len(), 1);
    }

    #[test]
    fn projective_constructor_validates() {
        let g = TimeGrid::sequential(0, 2, 2).unwrap();
        assert!(ElementaryHistory::projective(g.clone(), vec![proj(0), proj(1)], 1e-10).is_ok());
        assert!(matches!(
            ElementaryHistory::projective(g, vec![pauli_x(), proj(1)], 1e-10),
            Err(Error::NotProjector(_))
        ));
    }
}
