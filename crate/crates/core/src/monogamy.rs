//! Spatial and temporal monogamy.
//!
//! Qubit 0 is the most significant bit of a basis index: amplitude `k` of a
//! three-qubit state is `⟨a b c|ψ⟩` with `k = 4a + 2b + c`.
//!
//! Fidelities follow the squared Uhlmann convention
//! `F(ρ, σ) = (Tr √(√ρ σ √ρ))²`, which is `(ψ|ρ|ψ)` against a pure target.

use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::history::{BridgingSchedule, ElementaryHistory, HistoryVector, TimeGrid, TimeLabel};
use crate::kernel::gates::pauli_y;
use crate::kernel::random::random_state;
use crate::kernel::{hermitian_eig, sqrt_psd, ComplexMatrix, ZERO};
use crate::reduction::{max_entangled_computational, temporal_schmidt};

const MAX_QUBITS: usize = 12;

/// Normalized pure state of `n` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiQubitState {
    n: usize,
    amplitudes: Vec<C64>,
}

impl MultiQubitState {
    /// Amplitudes must have length `2ⁿ` and unit norm within 1e-12.
    pub fn new(n: usize, amplitudes: Vec<C64>) -> Result<Self> {
        if n == 0 || n > MAX_QUBITS || amplitudes.len() != 1 << n {
            return Err(Error::BadDimension(format!("{} amplitudes for {n} qubits", amplitudes.len())));
        }
        if amplitudes.iter().any(|z| !z.is_finite()) {
            return Err(Error::NonFinite);
        }
        let norm: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::NotNormalized(norm));
        }
        Ok(Self { n, amplitudes })
    }

    /// Rescales to unit norm first.
    pub fn normalized(n: usize, amplitudes: Vec<C64>) -> Result<Self> {
        let norm: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::NotNormalized(norm));
        }
        Self::new(n, amplitudes.into_iter().map(|z| z / norm).collect())
    }

    /// `|b_0 b_1 … ⟩`.
    pub fn product(bits: &[bool]) -> Result<Self> {
        let n = bits.len();
        let index = bits.iter().fold(0usize, |acc, &b| (acc << 1) | b as usize);
        let mut amps = vec![ZERO; 1 << n.min(MAX_QUBITS + 1)];
        if let Some(a) = amps.get_mut(index) {
            *a = C64::new(1.0, 0.0);
        }
        Self::new(n, amps)
    }

    /// `(|0…0⟩ + |1…1⟩)/√2`.
    pub fn ghz(n: usize) -> Result<Self> {
        let mut amps = vec![ZERO; 1 << n.min(MAX_QUBITS + 1)];
        let s = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        amps[0] = s;
        let last = amps.len() - 1;
        amps[last] = s;
        Self::new(n, amps)
    }

    /// Equal superposition of the single-excitation basis states.
    pub fn w(n: usize) -> Result<Self> {
        let mut amps = vec![ZERO; 1 << n.min(MAX_QUBITS + 1)];
        let s = C64::new(1.0 / (n as f64).sqrt(), 0.0);
        for q in 0..n {
            amps[1 << q] = s;
        }
        Self::new(n, amps)
    }

    /// `(|01⟩ − |10⟩)/√2`.
    pub fn singlet() -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Self { n: 2, amplitudes: vec![ZERO, C64::new(s, 0.0), C64::new(-s, 0.0), ZERO] }
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn density(&self) -> ComplexMatrix {
        ComplexMatrix::outer(&self.amplitudes, &self.amplitudes).expect("equal lengths")
    }

    /// Reduced density matrix on `keep`.
    pub fn reduced(&self, keep: &[usize]) -> Result<ComplexMatrix> {
        spatial_partial_trace(&self.density(), self.n, keep)
    }
}

/// Reduced density matrix of an `n`-qubit operator on the qubits in `keep`
/// (returned in ascending qubit order).
pub fn spatial_partial_trace(rho: &ComplexMatrix, n: usize, keep: &[usize]) -> Result<ComplexMatrix> {
    if n == 0 || n > MAX_QUBITS || rho.dim() != 1 << n {
        return Err(Error::BadDimension(format!("{}x{} operator for {n} qubits", rho.dim(), rho.dim())));
    }
    let mut kept = keep.to_vec();
    kept.sort_unstable();
    kept.dedup();
    if kept.is_empty() || kept.len() != keep.len() || kept.iter().any(|&q| q >= n) {
        return Err(Error::BadSubsystem(format!("keep {keep:?} of {n} qubits")));
    }
    let traced: Vec<usize> = (0..n).filter(|q| !kept.contains(q)).collect();
    let bit = |q: usize| 1usize << (n - 1 - q);
    let spread = |value: usize, qubits: &[usize]| {
        qubits
            .iter()
            .enumerate()
            .filter(|(i, _)| value >> (qubits.len() - 1 - i) & 1 == 1)
            .fold(0usize, |acc, (_, &q)| acc | bit(q))
    };
    let dk = 1usize << kept.len();
    let dt = 1usize << traced.len();
    let mut out = ComplexMatrix::zeros(dk);
    for r in 0..dk {
        let rbase = spread(r, &kept);
        for c in 0..dk {
            let cbase = spread(c, &kept);
            let mut acc = ZERO;
            for e in 0..dt {
                let off = spread(e, &traced);
                acc += rho.get(rbase | off, cbase | off);
            }
            out.set(r, c, acc);
        }
    }
    Ok(out)
}

/// `√(2(1 − Tr ρ_A²))` across the cut `part_a | rest`.
pub fn concurrence_pure(state: &MultiQubitState, part_a: &[usize]) -> Result<f64> {
    let rho_a = state.reduced(part_a)?;
    let p = rho_a.frobenius_inner(&rho_a)?.re;
    Ok((2.0 * (1.0 - p)).max(0.0).sqrt())
}

/// Spin-flip concurrence `max(0, λ₁ − λ₂ − λ₃ − λ₄)` of a two-qubit density.
pub fn concurrence_two_qubit_mixed(rho: &ComplexMatrix) -> Result<f64> {
    if rho.dim() != 4 {
        return Err(Error::BadDimension(format!("{}x{} is not a two-qubit operator", rho.dim(), rho.dim())));
    }
    rho.check_density(1e-9)?;
    let yy = pauli_y().kron(&pauli_y());
    let tilde = &(&yy * &rho.conj()) * &yy;
    let root = sqrt_psd(&rho.hermitian_part(), 1e-9)?;
    let r = (&(&root * &tilde) * &root).hermitian_part();
    let eig = hermitian_eig(&r, 1e-9)?;
    let l: Vec<f64> = eig.values.iter().map(|v| v.max(0.0).sqrt()).collect();
    Ok((l[0] - l[1] - l[2] - l[3]).max(0.0))
}

/// Which inequality direction to judge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CkwDirection {
    /// `C²(AB) + C²(AC) ≤ C²(A|BC)`.
    Standard,
    /// `C²(A|BC) ≤ C²(AB) + C²(AC)`, which GHZ violates.
    Printed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CkwReport {
    pub c2_a_bc: f64,
    pub c2_ab: f64,
    pub c2_ac: f64,
    /// `C²(A|BC) − C²(AB) − C²(AC)`.
    pub slack: f64,
    /// Standard direction, within 1e-9.
    pub satisfied: bool,
}

impl CkwReport {
    pub fn holds(&self, direction: CkwDirection, tol: f64) -> bool {
        match direction {
            CkwDirection::Standard => self.slack >= -tol,
            CkwDirection::Printed => self.slack <= tol,
        }
    }
}

pub fn ckw_check(state: &MultiQubitState) -> Result<CkwReport> {
    if state.n_qubits() != 3 {
        return Err(Error::BadDimension(format!("CKW needs three qubits, got {}", state.n_qubits())));
    }
    let c2_a_bc = concurrence_pure(state, &[0])?.powi(2);
    let c2_ab = concurrence_two_qubit_mixed(&state.reduced(&[0, 1])?)?.powi(2);
    let c2_ac = concurrence_two_qubit_mixed(&state.reduced(&[0, 2])?)?.powi(2);
    let slack = c2_a_bc - c2_ab - c2_ac;
    Ok(CkwReport { c2_a_bc, c2_ab, c2_ac, slack, satisfied: slack >= -1e-9 })
}

/// Which reduced pairs enter the search objective.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MonogamyObjective {
    /// `min(F₃₂, F₂₁)`.
    Both,
    /// `F₃₂` only.
    LaterPair,
    /// `F₂₁` only.
    EarlierPair,
}

#[derive(Debug, Clone)]
pub struct MonogamySearchOptions {
    pub objective: MonogamyObjective,
    pub max_iterations: usize,
    pub fd_step: f64,
    /// Convergence threshold on objective movement over `window` iterations.
    pub tol: f64,
    pub window: usize,
}

impl Default for MonogamySearchOptions {
    fn default() -> Self {
        Self { objective: MonogamyObjective::Both, max_iterations: 3000, fd_step: 1e-5, tol: 1e-9, window: 50 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RestartRecord {
    pub index: usize,
    pub iterations: usize,
    pub value: f64,
    pub converged: bool,
    /// Objective movement over the final window.
    pub residual: f64,
    pub trajectory: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonogamySearchResult {
    pub dim: usize,
    pub seed: u64,
    pub objective: MonogamyObjective,
    pub best_min_fidelity: f64,
    pub best_f32: f64,
    pub best_f21: f64,
    pub best_restart: usize,
    /// Amplitudes `c[k₃][k₂][k₁]` (flattened, `k₁` fastest) of the best
    /// history over `[k₃] ⊙ [k₂] ⊙ [k₁]`.
    pub argmax: Vec<C64>,
    pub restarts: Vec<RestartRecord>,
}

impl MonogamySearchResult {
    pub fn all_converged(&self) -> bool {
        self.restarts.iter().all(|r| r.converged)
    }
}

/// `(F₃₂, F₂₁)` of the normalized history `Σ c[k₃,k₂,k₁] [k₃]⊙[k₂]⊙[k₁]`
/// against the maximally entangled history on each adjacent pair.
pub fn pair_fidelities(c: &[C64], dim: usize) -> (f64, f64) {
    let d2 = dim * dim;
    let norm: f64 = c.iter().map(|z| z.norm_sqr()).sum();
    let idx = |k3: usize, k2: usize, k1: usize| k3 * d2 + k2 * dim + k1;
    let mut f32 = 0.0;
    let mut f21 = 0.0;
    for m in 0..dim {
        let a: C64 = (0..dim).map(|i| c[idx(i, i, m)]).sum();
        let b: C64 = (0..dim).map(|j| c[idx(m, j, j)]).sum();
        f32 += a.norm_sqr();
        f21 += b.norm_sqr();
    }
    let scale = 1.0 / (dim as f64 * norm);
    (f32 * scale, f21 * scale)
}

/// History on a three-label grid from amplitudes over computational
/// projectors.
pub fn history_from_amplitudes(c: &[C64], grid: &TimeGrid) -> Result<HistoryVector> {
    let d = grid.dim();
    if grid.len() != 3 || c.len() != d * d * d {
        return Err(Error::BadDimension(format!("{} amplitudes on {grid}", c.len())));
    }
    let p = |k: usize| ComplexMatrix::basis_projector(d, k);
    let mut terms = Vec::new();
    for k3 in 0..d {
        for k2 in 0..d {
            for k1 in 0..d {
                let a = c[k3 * d * d + k2 * d + k1];
                if a != ZERO {
                    terms.push((a, ElementaryHistory::from_latest_first(grid.clone(), vec![p(k3)?, p(k2)?, p(k1)?])?));
                }
            }
        }
    }
    HistoryVector::new(grid.clone(), terms)
}

fn objective_value(c: &[C64], dim: usize, objective: MonogamyObjective) -> f64 {
    let (f32, f21) = pair_fidelities(c, dim);
    match objective {
        MonogamyObjective::Both => f32.min(f21),
        MonogamyObjective::LaterPair => f32,
        MonogamyObjective::EarlierPair => f21,
    }
}

fn normalize_in_place(x: &mut [C64]) {
    let n = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    x.iter_mut().for_each(|z| *z /= n);
}

fn run_restart(dim: usize, seed: u64, index: usize, opts: &MonogamySearchOptions) -> (RestartRecord, Vec<C64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    let len = dim * dim * dim;
    let mut x = random_state(&mut rng, len);
    let f = |v: &[C64]| objective_value(v, dim, opts.objective);
    let mut value = f(&x);
    let mut trajectory = vec![value];
    let mut step = 0.1;
    let mut converged = false;
    let mut residual = f64::INFINITY;
    let mut iterations = 0;
    let mut probe = x.clone();
    while iterations < opts.max_iterations {
        iterations += 1;
        // Central-difference gradient over real and imaginary parts.
        let mut grad = vec![ZERO; len];
        for k in 0..len {
            for (dir, unit) in [(0, C64::new(1.0, 0.0)), (1, C64::new(0.0, 1.0))] {
                probe[k] = x[k] + unit * opts.fd_step;
                let up = f(&probe);
                probe[k] = x[k] - unit * opts.fd_step;
                let down = f(&probe);
                probe[k] = x[k];
                let g = (up - down) / (2.0 * opts.fd_step);
                if dir == 0 {
                    grad[k].re = g;
                } else {
                    grad[k].im = g;
                }
            }
        }
        // Tangent projection onto the sphere.
        let radial: f64 = x.iter().zip(&grad).map(|(a, g)| (a.conj() * g).re).sum();
        for (g, a) in grad.iter_mut().zip(&x) {
            *g -= a * radial;
        }
        let mut accepted = false;
        while step > 1e-14 {
            let mut cand: Vec<C64> = x.iter().zip(&grad).map(|(a, g)| a + g * step).collect();
            normalize_in_place(&mut cand);
            let v = f(&cand);
            if v > value {
                x = cand;
                probe.copy_from_slice(&x);
                value = v;
                step *= 1.5;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        trajectory.push(value);
        if trajectory.len() > opts.window {
            residual = value - trajectory[trajectory.len() - 1 - opts.window];
            if residual < opts.tol {
                converged = true;
                break;
            }
        }
        if !accepted {
            residual = 0.0;
            converged = true;
            break;
        }
    }
    (RestartRecord { index, iterations, value, converged, residual, trajectory }, x)
}

/// Seeded random-restart search for `max min(F₃₂, F₂₁)` over three-time
/// histories with identity bridging.
pub fn temporal_monogamy_search(
    dim: usize,
    times: &TimeGrid,
    restarts: usize,
    seed: u64,
) -> Result<MonogamySearchResult> {
    temporal_monogamy_search_with(dim, times, restarts, seed, &MonogamySearchOptions::default())
}

pub fn temporal_monogamy_search_with(
    dim: usize,
    times: &TimeGrid,
    restarts: usize,
    seed: u64,
    opts: &MonogamySearchOptions,
) -> Result<MonogamySearchResult> {
    if dim < 2 {
        return Err(Error::BadDimension(format!("slot dimension {dim}")));
    }
    if times.len() != 3 || times.dim() != dim {
        return Err(Error::GridMismatch(format!("need three labels of dimension {dim}, got {times}")));
    }
    if restarts == 0 {
        return Err(Error::OutOfRange("restarts must be at least 1".into()));
    }
    let runs: Vec<(RestartRecord, Vec<C64>)> =
        (0..restarts).into_par_iter().map(|r| run_restart(dim, seed, r, opts)).collect();
    let (best_restart, _) =
        runs.iter().enumerate().fold(
            (0, f64::NEG_INFINITY),
            |(bi, bv), (i, (rec, _))| if rec.value > bv { (i, rec.value) } else { (bi, bv) },
        );
    let argmax = runs[best_restart].1.clone();
    let (best_f32, best_f21) = pair_fidelities(&argmax, dim);
    Ok(MonogamySearchResult {
        dim,
        seed,
        objective: opts.objective,
        best_min_fidelity: runs[best_restart].0.value,
        best_f32,
        best_f21,
        best_restart,
        argmax,
        restarts: runs.into_iter().map(|(r, _)| r).collect(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PurificationCheck {
    pub purity: f64,
    pub fidelity: f64,
    pub schmidt_rank: usize,
    pub factorizes: bool,
}

/// Reduces a four-time history onto its two earliest times and checks it
/// against the maximally entangled history over computational projectors.
pub fn purification_factorization_check(h: &HistoryVector, s: &BridgingSchedule) -> Result<PurificationCheck> {
    let grid = h.grid();
    grid.ensure_same(s.grid())?;
    if grid.len() != 4 {
        return Err(Error::GridMismatch(format!("need four times, got {grid}")));
    }
    if !s.is_identity(1e-12) {
        return Err(Error::GridMismatch("purification check assumes identity bridging".into()));
    }
    let labels = grid.labels();
    let sd = temporal_schmidt(h, labels[2])?;
    let pair = TimeGrid::new(vec![labels[0], labels[1]], grid.dim())?;
    let psi = max_entangled_computational(&pair)?;
    let fidelity: f64 = sd
        .coefficients
        .iter()
        .zip(&sd.earlier)
        .map(|(l, r)| Ok(l * l * psi.tensor_inner(r)?.norm_sqr()))
        .sum::<Result<f64>>()?;
    let purity = sd.reduced_purity();
    let schmidt_rank = sd.rank(1e-9);
    let factorizes = (fidelity - 1.0).abs() <= 1e-9 && schmidt_rank == 1;
    Ok(PurificationCheck { purity, fidelity, schmidt_rank, factorizes })
}

/// Grid `t1 < t2 < t3` of slot dimension `dim`.
pub fn three_times(dim: usize) -> Result<TimeGrid> {
    TimeGrid::new(vec![TimeLabel(1), TimeLabel(2), TimeLabel(3)], dim)
}
