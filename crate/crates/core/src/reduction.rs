//! Temporal partial traces and the entanglement quantities built on them.
//!
//! Reductions live in the tensor space of slot operators, `⊗_t M_d`, with
//! the slot-wise Hilbert–Schmidt product
//! `((A_n ⊙ … ⊙ A_0)|(B_n ⊙ … ⊙ B_0)) = Π_t Tr(A_t† B_t)`. The bridged
//! (chain-operator) product of [`crate::history::inner_product`] decides
//! which families are admissible as traced bases: a [`TemporalBasis`] must be
//! orthonormal in both products under the schedule induced on the traced
//! block. For single-time blocks the two products coincide.
//!
//! A [`ReducedHistoryOperator`] is stored as a matrix on an orthonormal basis
//! of its support, so operators from different reductions can be compared by
//! re-expressing them in a declared basis ([`ReducedHistoryOperator::in_basis`]).

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::history::{inner_product, BridgingSchedule, ElementaryHistory, HistoryVector, TimeGrid, TimeLabel};
use crate::kernel::{hermitian_eig, sqrt_psd, ComplexMatrix, ONE, ZERO};

/// Orthonormality tolerance on basis Gram matrices.
pub const BASIS_TOL: f64 = 1e-10;

/// Relative cutoff below which Gram eigenvalues are treated as null
/// directions.
const RANK_CUTOFF: f64 = 1e-12;

/// Orthonormal family of histories on a block of times.
#[derive(Debug, Clone)]
pub struct TemporalBasis {
    grid: TimeGrid,
    members: Vec<HistoryVector>,
}

impl TemporalBasis {
    /// Members must share one grid and be orthonormal under the slot-wise
    /// product within `tol`.
    pub fn new(members: Vec<HistoryVector>, tol: f64) -> Result<Self> {
        let first = members.first().ok_or_else(|| Error::IncompleteBasis("basis has no members".into()))?;
        let grid = first.grid().clone();
        for m in &members {
            grid.ensure_same(m.grid())?;
        }
        let defect = gram_identity_defect(&members, |a, b| a.tensor_inner(b))?;
        if defect > tol {
            return Err(Error::IncompleteBasis(format!("tensor Gram deviates from I by {defect:.3e}")));
        }
        Ok(Self { grid, members })
    }

    /// Single-time basis from slot operators at `label`.
    pub fn single_time(label: TimeLabel, slots: Vec<ComplexMatrix>, tol: f64) -> Result<Self> {
        let members = slots
            .into_iter()
            .map(|m| ElementaryHistory::single(label, m).map(HistoryVector::from))
            .collect::<Result<Vec<_>>>()?;
        Self::new(members, tol)
    }

    /// Rank-one computational projectors `|k⟩⟨k|`, `k < dim`.
    pub fn computational(label: TimeLabel, dim: usize) -> Result<Self> {
        let slots = (0..dim).map(|k| ComplexMatrix::basis_projector(dim, k)).collect::<Result<Vec<_>>>()?;
        Self::single_time(label, slots, BASIS_TOL)
    }

    /// Matrix units `|i⟩⟨j|`: a complete basis of the single-time slot space.
    pub fn matrix_units(label: TimeLabel, dim: usize) -> Result<Self> {
        let mut slots = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                slots.push(ComplexMatrix::unit(dim, i, j)?);
            }
        }
        Self::single_time(label, slots, BASIS_TOL)
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn members(&self) -> &[HistoryVector] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Deviation from `(e_i|e_j) = δ_ij` under the bridged product with the
    /// schedule restricted to the basis block.
    pub fn chain_gram_defect(&self, s: &BridgingSchedule) -> Result<f64> {
        let sub = s.restrict(&self.grid)?;
        gram_identity_defect(&self.members, |a, b| inner_product(a, b, &sub))
    }

    /// Whether the basis covers the whole slot space of its block
    /// (`d^{2k}` members for a `k`-time block).
    pub fn spans_block(&self) -> bool {
        let d2 = self.grid.dim() * self.grid.dim();
        d2.checked_pow(self.grid.len() as u32) == Some(self.members.len())
    }
}

fn gram_identity_defect(
    members: &[HistoryVector],
    product: impl Fn(&HistoryVector, &HistoryVector) -> Result<C64>,
) -> Result<f64> {
    let mut acc = 0.0;
    for (i, a) in members.iter().enumerate() {
        for (j, b) in members.iter().enumerate() {
            let want = if i == j { ONE } else { ZERO };
            acc += (product(a, b)? - want).norm_sqr();
        }
    }
    Ok(acc.sqrt())
}

/// Positive operator on the history space of the retained times.
#[derive(Debug, Clone)]
pub struct ReducedHistoryOperator {
    grid: TimeGrid,
    support: Vec<HistoryVector>,
    matrix: ComplexMatrix,
    trace: f64,
    warnings: Vec<String>,
}

impl ReducedHistoryOperator {
    /// `Σ_k |y_k)(y_k|` for the given ensemble.
    pub fn from_ensemble(grid: TimeGrid, ensemble: &[HistoryVector]) -> Result<Self> {
        for y in ensemble {
            grid.ensure_same(y.grid())?;
        }
        let (support, coords) = orthonormal_support(&grid, ensemble)?;
        if support.is_empty() {
            return Err(Error::ZeroTrace);
        }
        // ρ = C C† with C the ensemble coordinates on the support basis.
        let r = support.len();
        let mut matrix = ComplexMatrix::zeros(r);
        for i in 0..r {
            for j in 0..r {
                let v: C64 = coords.iter().map(|c| c[i] * c[j].conj()).sum();
                matrix.set(i, j, v);
            }
        }
        let trace = matrix.trace().re;
        Ok(Self { grid, support, matrix, trace, warnings: Vec::new() })
    }

    /// `|v)(v|`.
    pub fn pure(v: &HistoryVector) -> Result<Self> {
        Self::from_ensemble(v.grid().clone(), std::slice::from_ref(v))
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    /// Orthonormal basis of the support, in the slot-wise product.
    pub fn support(&self) -> &[HistoryVector] {
        &self.support
    }

    /// Operator on [`Self::support`].
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.trace
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn rank(&self) -> usize {
        self.support.len()
    }

    /// Copy with unit trace.
    pub fn normalized(&self) -> Result<Self> {
        if self.trace <= 0.0 {
            return Err(Error::ZeroTrace);
        }
        let mut out = self.clone();
        out.matrix = self.matrix.scale_real(1.0 / self.trace);
        out.trace = 1.0;
        Ok(out)
    }

    /// Eigenvalues (descending) of the operator.
    pub fn spectrum(&self) -> Result<Vec<f64>> {
        Ok(hermitian_eig(&self.matrix.hermitian_part(), 1e-12)?.values)
    }

    /// Coordinates of `v` on the support basis.
    fn coordinates(&self, v: &HistoryVector) -> Result<Vec<C64>> {
        self.support.iter().map(|f| f.tensor_inner(v)).collect()
    }

    /// `(v|ρ|v)`.
    pub fn expectation(&self, v: &HistoryVector) -> Result<f64> {
        self.grid.ensure_same(v.grid())?;
        let c = self.coordinates(v)?;
        let mut acc = ZERO;
        for (i, ci) in c.iter().enumerate() {
            for (j, cj) in c.iter().enumerate() {
                acc += ci.conj() * self.matrix.get(i, j) * cj;
            }
        }
        Ok(acc.re)
    }

    /// Fidelity to the ray of `v`, both sides normalized:
    /// `(v|ρ|v) / ((v|v) Tr ρ)`.
    pub fn fidelity_to_pure(&self, v: &HistoryVector) -> Result<f64> {
        let norm = v.tensor_norm_sq();
        if norm <= 0.0 {
            return Err(Error::ZeroWeightHistory(norm));
        }
        if self.trace <= 0.0 {
            return Err(Error::ZeroTrace);
        }
        Ok(self.expectation(v)? / (norm * self.trace))
    }

    /// Matrix `⟨b_a|ρ|b_b⟩` in a declared basis of the retained space.
    pub fn in_basis(&self, basis: &[HistoryVector]) -> Result<ComplexMatrix> {
        if basis.is_empty() {
            return Err(Error::BadDimension("empty representation basis".into()));
        }
        let coords = basis.iter().map(|b| self.coordinates(b)).collect::<Result<Vec<_>>>()?;
        let n = basis.len();
        let r = self.support.len();
        let mut out = ComplexMatrix::zeros(n);
        for a in 0..n {
            for b in 0..n {
                let mut acc = ZERO;
                for i in 0..r {
                    for j in 0..r {
                        acc += coords[a][i].conj() * self.matrix.get(i, j) * coords[b][j];
                    }
                }
                out.set(a, b, acc);
            }
        }
        Ok(out)
    }
}

/// Orthonormal basis (slot-wise product) of `span{v_k}` together with the
/// coordinates of every `v_k` on it.
fn orthonormal_support(grid: &TimeGrid, vectors: &[HistoryVector]) -> Result<(Vec<HistoryVector>, Vec<Vec<C64>>)> {
    let n = vectors.len();
    if n == 0 {
        return Ok((Vec::new(), Vec::new()));
    }
    let mut gram = ComplexMatrix::zeros(n);
    for i in 0..n {
        for j in i..n {
            let v = vectors[i].tensor_inner(&vectors[j])?;
            gram.set(i, j, v);
            gram.set(j, i, v.conj());
        }
    }
    let eig = hermitian_eig(&gram.hermitian_part(), 1e-12)?;
    let top = eig.values.first().copied().unwrap_or(0.0);
    if top <= 0.0 {
        return Ok((Vec::new(), vec![Vec::new(); n]));
    }
    let mut support = Vec::new();
    let mut kept = Vec::new();
    for (i, &lambda) in eig.values.iter().enumerate() {
        if lambda <= RANK_CUTOFF * top {
            break;
        }
        let inv = 1.0 / lambda.sqrt();
        let parts: Vec<(C64, &HistoryVector)> = (0..n).map(|k| (eig.vectors.get(k, i) * inv, &vectors[k])).collect();
        support.push(HistoryVector::linear_combination(grid, &parts)?);
        kept.push((i, lambda));
    }
    // ⟨f_i|v_k⟩ = √λ_i · conj(U_ki).
    let coords = (0..n)
        .map(|k| kept.iter().map(|&(i, lambda)| eig.vectors.get(k, i).conj() * lambda.sqrt()).collect())
        .collect();
    Ok((support, coords))
}

/// Uhlmann fidelity `(Tr √(√ρ σ √ρ))²` of the normalized operators.
pub fn fidelity(a: &ReducedHistoryOperator, b: &ReducedHistoryOperator) -> Result<f64> {
    a.grid.ensure_same(&b.grid)?;
    let a = a.normalized()?;
    let b = b.normalized()?;
    if b.rank() == 1 {
        return a.fidelity_to_pure(&b.support[0]);
    }
    if a.rank() == 1 {
        return b.fidelity_to_pure(&a.support[0]);
    }
    let mut union: Vec<HistoryVector> = a.support.clone();
    union.extend(b.support.iter().cloned());
    let (basis, _) = orthonormal_support(&a.grid, &union)?;
    let ra = a.in_basis(&basis)?.hermitian_part();
    let rb = b.in_basis(&basis)?.hermitian_part();
    let sa = sqrt_psd(&ra, 1e-9)?;
    let inner = (&(&sa * &rb) * &sa).hermitian_part();
    let spectrum = hermitian_eig(&inner, 1e-9)?.values;
    Ok(spectrum.iter().map(|m| m.max(0.0).sqrt()).sum::<f64>().powi(2))
}

/// `(e|Y)` contracted over the traced labels: a history on the retained
/// labels.
fn partial_contraction(
    e: &HistoryVector,
    y: &HistoryVector,
    traced: &[TimeLabel],
    retained: &TimeGrid,
) -> Result<HistoryVector> {
    let mut terms = Vec::with_capacity(y.terms().len());
    for (a, hy) in y.terms() {
        let block: HistoryVector = hy.restrict(traced)?.into();
        let overlap = e.tensor_inner(&block)?;
        if overlap == ZERO {
            continue;
        }
        terms.push((a * overlap, hy.restrict(retained.labels())?));
    }
    HistoryVector::new(retained.clone(), terms)
}

/// Checks that `traced` is a non-empty contiguous block of `grid` leaving at
/// least one retained label; returns the retained grid.
fn split_grid(grid: &TimeGrid, traced: &[TimeLabel]) -> Result<TimeGrid> {
    if traced.is_empty() {
        return Err(Error::GridMismatch("no labels to trace over".into()));
    }
    let mut positions = traced.iter().map(|l| grid.require(*l)).collect::<Result<Vec<_>>>()?;
    positions.sort_unstable();
    positions.dedup();
    if positions.len() != traced.len() {
        return Err(Error::GridMismatch("traced labels repeat".into()));
    }
    if positions.windows(2).any(|w| w[1] != w[0] + 1) {
        let names: Vec<String> = traced.iter().map(|l| l.to_string()).collect();
        return Err(Error::NonContiguousBlock(format!("{{{}}} on {grid}", names.join(","))));
    }
    let retained = grid.without(traced);
    if retained.is_empty() {
        return Err(Error::GridMismatch("tracing every label leaves nothing".into()));
    }
    TimeGrid::new(retained, grid.dim())
}

/// Reduction `Σ_k (e_k|Y)(Y|e_k)` of `|Y)(Y|` onto the labels not in
/// `traced`.
pub fn partial_trace(
    y: &HistoryVector,
    traced: &[TimeLabel],
    basis: &TemporalBasis,
    s: &BridgingSchedule,
) -> Result<ReducedHistoryOperator> {
    partial_trace_mixture(&[(1.0, y.clone())], traced, basis, s)
}

/// Reduction of `Σ_i p_i |Y_i)(Y_i|`.
pub fn partial_trace_mixture(
    mixture: &[(f64, HistoryVector)],
    traced: &[TimeLabel],
    basis: &TemporalBasis,
    s: &BridgingSchedule,
) -> Result<ReducedHistoryOperator> {
    let (_, first) = mixture.first().ok_or_else(|| Error::BadDimension("empty mixture".into()))?;
    let grid = first.grid().clone();
    grid.ensure_same(s.grid())?;
    let retained = split_grid(&grid, traced)?;

    let traced_grid = grid.sub_grid(traced)?;
    if basis.grid() != &traced_grid {
        return Err(Error::GridMismatch(format!("basis lives on {}, traced block is {traced_grid}", basis.grid())));
    }
    let defect = basis.chain_gram_defect(s)?;
    if defect > BASIS_TOL {
        return Err(Error::IncompleteBasis(format!(
            "bridged Gram deviates from I by {defect:.3e} under the induced schedule"
        )));
    }

    let mut ensemble = Vec::with_capacity(mixture.len() * basis.len());
    let mut input_norm = 0.0;
    for (p, y) in mixture {
        grid.ensure_same(y.grid())?;
        if *p < 0.0 || !p.is_finite() {
            return Err(Error::OutOfRange(format!("mixture weight {p}")));
        }
        input_norm += p * y.tensor_norm_sq();
        for e in basis.members() {
            let yk = partial_contraction(e, y, traced_grid.labels(), &retained)?;
            ensemble.push(yk.scale(C64::new(p.sqrt(), 0.0)));
        }
    }
    if input_norm <= 0.0 {
        return Err(Error::ZeroWeightHistory(input_norm));
    }
    let mut op = ReducedHistoryOperator::from_ensemble(retained, &ensemble).map_err(|e| match e {
        Error::ZeroTrace => Error::IncompleteBasis("basis is orthogonal to the traced support".into()),
        other => other,
    })?;
    let lost = input_norm - op.trace;
    if lost.abs() > 1e-10 * input_norm.max(1.0) {
        op.warnings.push(format!(
            "basis does not span the traced support: trace {:.12} vs input norm {:.12}",
            op.trace, input_norm
        ));
    }
    Ok(op)
}

/// `(1/√N) Σ_i e_i ⊙ e_i` on a two-label grid, with `e_i` the single-time
/// members of `basis`.
pub fn max_entangled_history(n: usize, basis: &TemporalBasis, grid: &TimeGrid) -> Result<HistoryVector> {
    if n < 2 {
        return Err(Error::BadDimension(format!("N = {n}, need N ≥ 2")));
    }
    if basis.len() != n {
        return Err(Error::BadDimension(format!("N = {n} but basis has {} members", basis.len())));
    }
    if basis.grid().len() != 1 || grid.len() != 2 {
        return Err(Error::BadDimension("need a single-time basis and a two-label grid".into()));
    }
    if basis.grid().dim() != grid.dim() {
        return Err(Error::DimensionMismatch(format!("{} vs {}", basis.grid().dim(), grid.dim())));
    }
    let amp = C64::new(1.0 / (n as f64).sqrt(), 0.0);
    let mut terms = Vec::new();
    for m in basis.members() {
        for (a, e) in m.terms() {
            for (b, f) in m.terms() {
                let slot_e = e.slots_earliest_first()[0].clone();
                let slot_f = f.slots_earliest_first()[0].clone();
                let h = ElementaryHistory::from_latest_first(grid.clone(), vec![slot_e, slot_f])?;
                terms.push((amp * a * b, h));
            }
        }
    }
    HistoryVector::new(grid.clone(), terms)
}

/// Maximally entangled history over computational projectors of dimension
/// `grid.dim()`.
pub fn max_entangled_computational(grid: &TimeGrid) -> Result<HistoryVector> {
    let basis = TemporalBasis::computational(grid.first(), grid.dim())?;
    max_entangled_history(grid.dim(), &basis, grid)
}

/// `Tr(ρ²)` of the normalized operator.
pub fn purity(r: &ReducedHistoryOperator) -> Result<f64> {
    let n = r.normalized()?;
    let m = n.matrix();
    Ok(m.frobenius_inner(&m.adjoint())?.re)
}

/// Schmidt decomposition across a time cut.
#[derive(Debug, Clone)]
pub struct SchmidtDecomposition {
    /// Descending, non-negative, squares summing to one.
    pub coefficients: Vec<f64>,
    /// Orthonormal histories on the labels at or after the cut.
    pub later: Vec<HistoryVector>,
    /// Orthonormal histories on the labels before the cut.
    pub earlier: Vec<HistoryVector>,
}

impl SchmidtDecomposition {
    pub fn rank(&self, tol: f64) -> usize {
        self.coefficients.iter().filter(|c| **c > tol).count()
    }

    /// `Σ λ_k⁴`, the purity of either reduction.
    pub fn reduced_purity(&self) -> f64 {
        self.coefficients.iter().map(|c| c.powi(4)).sum()
    }
}

/// Schmidt decomposition of the normalized `h` across `cut`: labels `≥ cut`
/// form the later factor.
pub fn temporal_schmidt(h: &HistoryVector, cut: TimeLabel) -> Result<SchmidtDecomposition> {
    let grid = h.grid();
    let pos = grid.require(cut)?;
    if pos == 0 {
        return Err(Error::GridMismatch(format!("cut {cut} leaves no earlier labels")));
    }
    let norm = h.tensor_norm_sq();
    if norm <= 0.0 {
        return Err(Error::ZeroWeightHistory(norm));
    }
    let h = h.scale(C64::new(1.0 / norm.sqrt(), 0.0));
    let later_grid = TimeGrid::new(grid.labels()[pos..].to_vec(), grid.dim())?;
    let earlier_grid = TimeGrid::new(grid.labels()[..pos].to_vec(), grid.dim())?;

    let mut later_parts = Vec::with_capacity(h.terms().len());
    let mut earlier_parts = Vec::with_capacity(h.terms().len());
    for (_, e) in h.terms() {
        later_parts.push(HistoryVector::from(e.restrict(later_grid.labels())?));
        earlier_parts.push(HistoryVector::from(e.restrict(earlier_grid.labels())?));
    }
    let (f, a_later) = orthonormal_support(&later_grid, &later_parts)?;
    let (g, a_earlier) = orthonormal_support(&earlier_grid, &earlier_parts)?;

    let mut m = DMatrix::<C64>::zeros(f.len(), g.len());
    for (t, (amp, _)) in h.terms().iter().enumerate() {
        for i in 0..f.len() {
            for j in 0..g.len() {
                m[(i, j)] += amp * a_later[t][i] * a_earlier[t][j];
            }
        }
    }
    let svd = m.svd(true, true);
    let u = svd.u.expect("requested");
    let v_t = svd.v_t.expect("requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&x, &y| svd.singular_values[y].total_cmp(&svd.singular_values[x]));

    let mut coefficients = Vec::new();
    let mut later = Vec::new();
    let mut earlier = Vec::new();
    for k in order {
        let sigma = svd.singular_values[k];
        if sigma <= RANK_CUTOFF {
            continue;
        }
        let left: Vec<(C64, &HistoryVector)> = (0..f.len()).map(|i| (u[(i, k)], &f[i])).collect();
        // M = U Σ V†, so the earlier factor uses the k-th row of V† as is.
        let right: Vec<(C64, &HistoryVector)> = (0..g.len()).map(|j| (v_t[(k, j)], &g[j])).collect();
        coefficients.push(sigma);
        later.push(HistoryVector::linear_combination(&later_grid, &left)?);
        earlier.push(HistoryVector::linear_combination(&earlier_grid, &right)?);
    }
    Ok(SchmidtDecomposition { coefficients, later, earlier })
}

/// `√(2(1 − Tr ρ²))` with `ρ` the normalized reduction of a two-time history
/// onto its earlier time; `basis` lives on the later time.
pub fn temporal_concurrence(h: &HistoryVector, s: &BridgingSchedule, basis: &TemporalBasis) -> Result<f64> {
    let grid = h.grid();
    if grid.len() != 2 {
        return Err(Error::GridMismatch(format!("temporal concurrence needs two times, got {grid}")));
    }
    let norm = h.tensor_norm_sq();
    if norm <= 0.0 {
        return Err(Error::ZeroWeightHistory(norm));
    }
    let h = h.scale(C64::new(1.0 / norm.sqrt(), 0.0));
    let rho = partial_trace(&h, &[grid.last()], basis, s)?;
    let p = purity(&rho)?;
    Ok((2.0 * (1.0 - p)).max(0.0).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::gates::hadamard;

    fn proj(d: usize, k: usize) -> ComplexMatrix {
        ComplexMatrix::basis_projector(d, k).unwrap()
    }

    fn two_time(d: usize) -> TimeGrid {
        TimeGrid::sequential(1, 2, d).unwrap()
    }

    fn product(grid: &TimeGrid, later: ComplexMatrix, earlier: ComplexMatrix) -> HistoryVector {
        ElementaryHistory::from_latest_first(grid.clone(), vec![later, earlier]).unwrap().into()
    }

    #[test]
    fn factorized_history_reduces_to_its_factor() {
        let g = TimeGrid::sequential(0, 2, 2).unwrap();
        let f1 = hadamard();
        let f0 = proj(2, 1);
        let y = product(&g, f1.clone(), f0);
        let basis = TemporalBasis::matrix_units(TimeLabel(0), 2).unwrap();
        let r = partial_trace(&y, &[TimeLabel(0)], &basis, &BridgingSchedule::identity(g)).unwrap();
        let f1_hist: HistoryVector = ElementaryHistory::single(TimeLabel(1), f1).unwrap().into();
        assert_eq!(r.rank(), 1);
        assert!((r.fidelity_to_pure(&f1_hist).unwrap() - 1.0).abs() < 1e-12);
        assert!(r.warnings().is_empty());
    }

    #[test]
    fn maxent_reduction_is_maximally_mixed() {
        let g = two_time(2);
        let psi = max_entangled_computational(&g).unwrap();
        let basis = TemporalBasis::computational(TimeLabel(1), 2).unwrap();
        let r = partial_trace(&psi, &[TimeLabel(1)], &basis, &BridgingSchedule::identity(g)).unwrap();
        assert!((purity(&r).unwrap() - 0.5).abs() < 1e-12);
        assert!((r.trace() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_blocks_and_bases() {
        let g = TimeGrid::sequential(0, 3, 2).unwrap();
        let s = BridgingSchedule::identity(g.clone());
        let y: HistoryVector = ElementaryHistory::identity(g.clone()).into();
        let basis0 = TemporalBasis::computational(TimeLabel(0), 2).unwrap();
        assert!(matches!(
            partial_trace(&y, &[TimeLabel(0), TimeLabel(2)], &basis0, &s),
            Err(Error::NonContiguousBlock(_))
        ));
        assert!(matches!(partial_trace(&y, &[TimeLabel(1)], &basis0, &s), Err(Error::GridMismatch(_))));
        assert!(matches!(partial_trace(&y, &[TimeLabel(9)], &basis0, &s), Err(Error::GridMismatch(_))));
        let not_orthonormal = TemporalBasis::single_time(TimeLabel(0), vec![proj(2, 0), proj(2, 0)], 1e-10);
        assert!(matches!(not_orthonormal, Err(Error::IncompleteBasis(_))));
    }

    #[test]
    fn multi_time_basis_must_be_consistent_under_schedule() {
        // {e_i ⊙ e_j} is slot-wise orthonormal, but with identity bridging the
        // off-diagonal products e_i e_j vanish, so the bridged Gram is not I.
        let g = TimeGrid::sequential(0, 3, 2).unwrap();
        let block = TimeGrid::sequential(1, 2, 2).unwrap();
        let members: Vec<HistoryVector> =
            [(0, 0), (0, 1), (1, 0), (1, 1)].iter().map(|&(a, b)| product(&block, proj(2, a), proj(2, b))).collect();
        let basis = TemporalBasis::new(members, 1e-10).unwrap();
        let s = BridgingSchedule::identity(g.clone());
        let y: HistoryVector = ElementaryHistory::identity(g).into();
        assert!(matches!(partial_trace(&y, &[TimeLabel(1), TimeLabel(2)], &basis, &s), Err(Error::IncompleteBasis(_))));
    }

    #[test]
    fn purity_of_maxent_three() {
        let g = two_time(3);
        let psi = max_entangled_computational(&g).unwrap();
        let basis = TemporalBasis::computational(TimeLabel(2), 3).unwrap();
        let r = partial_trace(&psi, &[TimeLabel(2)], &basis, &BridgingSchedule::identity(g)).unwrap();
        assert!((purity(&r).unwrap() - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn maxent_rejects_bad_n() {
        let g = two_time(2);
        let basis = TemporalBasis::computational(TimeLabel(1), 2).unwrap();
        assert!(matches!(max_entangled_history(1, &basis, &g), Err(Error::BadDimension(_))));
        assert!(matches!(max_entangled_history(3, &basis, &g), Err(Error::BadDimension(_))));
    }

    #[test]
    fn concurrence_closed_forms() {
        let g = two_time(2);
        let s = BridgingSchedule::identity(g.clone());
        let basis = TemporalBasis::computational(TimeLabel(2), 2).unwrap();
        let prod = product(&g, proj(2, 0), proj(2, 1));
        assert!(temporal_concurrence(&prod, &s, &basis).unwrap().abs() < 1e-7);

        let maxent = max_entangled_computational(&g).unwrap();
        assert!((temporal_concurrence(&maxent, &s, &basis).unwrap() - 1.0).abs() < 1e-12);

        // √0.8 e0⊙e0 + √0.2 e1⊙e1: Tr ρ² = 0.64 + 0.04 = 0.68, C = √0.64.
        let a = product(&g, proj(2, 0), proj(2, 0)).scale(C64::new(0.8f64.sqrt(), 0.0));
        let b = product(&g, proj(2, 1), proj(2, 1)).scale(C64::new(0.2f64.sqrt(), 0.0));
        let h = a.add(&b).unwrap();
        assert!((temporal_concurrence(&h, &s, &basis).unwrap() - 0.8).abs() < 1e-12);
    }

    #[test]
    fn schmidt_of_product_and_maxent() {
        let g = two_time(2);
        let prod = product(&g, hadamard(), proj(2, 1));
        let sd = temporal_schmidt(&prod, TimeLabel(2)).unwrap();
        assert_eq!(sd.coefficients.len(), 1);
        assert!((sd.coefficients[0] - 1.0).abs() < 1e-12);

        let maxent = max_entangled_computational(&g).unwrap();
        let sd = temporal_schmidt(&maxent, TimeLabel(2)).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert_eq!(sd.coefficients.len(), 2);
        assert!(sd.coefficients.iter().all(|c| (c - s).abs() < 1e-12));
        assert!(matches!(temporal_schmidt(&maxent, TimeLabel(1)), Err(Error::GridMismatch(_))));
    }

    #[test]
    fn schmidt_reconstructs_history() {
        let g = two_time(2);
        let h = product(&g, hadamard(), proj(2, 0))
            .add(&product(&g, proj(2, 1), hadamard()).scale(C64::new(0.3, -0.7)))
            .unwrap();
        let n = h.tensor_norm_sq().sqrt();
        let sd = temporal_schmidt(&h, TimeLabel(2)).unwrap();
        let mut rebuilt = HistoryVector::zero(g.clone());
        for ((c, l), e) in sd.coefficients.iter().zip(&sd.later).zip(&sd.earlier) {
            rebuilt = rebuilt.add(&l.odot(e).unwrap().scale(C64::new(c * n, 0.0))).unwrap();
        }
        let diff = rebuilt.add(&h.scale(C64::new(-1.0, 0.0))).unwrap();
        assert!(diff.tensor_norm_sq() < 1e-24);
        let total: f64 = sd.coefficients.iter().map(|c| c * c).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn incomplete_basis_warns() {
        let g = two_time(2);
        let s = BridgingSchedule::identity(g.clone());
        let h = product(&g, proj(2, 0), hadamard());
        let basis = TemporalBasis::computational(TimeLabel(1), 2).unwrap();
        let r = partial_trace(&h, &[TimeLabel(1)], &basis, &s).unwrap();
        assert!(!r.warnings().is_empty());
    }

    #[test]
    fn uhlmann_fidelity_examples() {
        let g = TimeGrid::sequential(0, 1, 2).unwrap();
        let e0: HistoryVector = ElementaryHistory::single(TimeLabel(0), proj(2, 0)).unwrap().into();
        let e1: HistoryVector = ElementaryHistory::single(TimeLabel(0), proj(2, 1)).unwrap().into();
        let mixed = ReducedHistoryOperator::from_ensemble(g.clone(), &[e0.clone(), e1.clone()]).unwrap();
        let pure0 = ReducedHistoryOperator::pure(&e0).unwrap();
        assert!((fidelity(&mixed, &pure0).unwrap() - 0.5).abs() < 1e-12);
        assert!((fidelity(&mixed, &mixed).unwrap() - 1.0).abs() < 1e-9);
        let pure1 = ReducedHistoryOperator::pure(&e1).unwrap();
        assert!(fidelity(&pure0, &pure1).unwrap().abs() < 1e-12);
    }
}
