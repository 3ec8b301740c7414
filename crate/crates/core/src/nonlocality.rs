//! Local hidden variable bounds and two-time quantum correlations.
//!
//! Correlators come from projective, non-selective (Lüders) measurement of
//! `A` at the earlier time followed by `B` at the later time. Using
//! `Σ_a a Π_a X Π_a = (AX + XA)/2`, the correlator reduces to
//! `c = Tr[B' (Aρ + ρA)/2]` with `B' = U† B U` and `U` the bridge between the
//! two times; the see-saw and the Bell operator are built on that form.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::history::{weight, BridgingSchedule, ElementaryHistory, HistoryVector, TimeLabel};
use crate::kernel::random::random_dichotomic;
use crate::kernel::{hermitian_eig, sign_operator, ComplexMatrix};

/// Tolerance on `O² = I` and Hermiticity of settings.
pub const SETTING_TOL: f64 = 1e-10;

/// Sign pattern of `S = c₁₂ + c₂₁ + c₁₁ − c₂₂`, indexed `[i][j]` for
/// `c_{i+1, j+1}`.
pub const LGI_SIGNS: [[f64; 2]; 2] = [[1.0, 1.0], [1.0, -1.0]];

/// `Σ α(a,b,x,y) p(a,b|x,y) + offset` over dichotomic outcomes.
///
/// Outcome index 0 is `+1`, index 1 is `−1`.
#[derive(Debug, Clone, PartialEq)]
pub struct BellFunctional {
    m: usize,
    n: usize,
    /// `α[((x·n + y)·2 + a)·2 + b]`, all non-negative.
    alpha: Vec<f64>,
    offset: f64,
}

impl BellFunctional {
    pub fn new(m: usize, n: usize, alpha: Vec<f64>, offset: f64) -> Result<Self> {
        if m == 0 || n == 0 || m > 16 || n > 16 {
            return Err(Error::BadDimension(format!("{m}x{n} settings")));
        }
        if alpha.len() != m * n * 4 {
            return Err(Error::BadDimension(format!("{} coefficients for {m}x{n} settings", alpha.len())));
        }
        if alpha.iter().any(|a| !a.is_finite()) || !offset.is_finite() {
            return Err(Error::NonFinite);
        }
        if let Some(a) = alpha.iter().find(|a| **a < 0.0) {
            return Err(Error::OutOfRange(format!("negative coefficient {a}")));
        }
        Ok(Self { m, n, alpha, offset })
    }

    /// Functional equal to `Σ w_xy E_xy` on every behaviour, rewritten with
    /// non-negative coefficients via `E = 2p(same) − 1 = 1 − 2p(diff)`.
    pub fn from_correlators(w: &[Vec<f64>]) -> Result<Self> {
        let m = w.len();
        let n = w.first().map_or(0, Vec::len);
        if w.iter().any(|r| r.len() != n) {
            return Err(Error::BadDimension("ragged correlator weights".into()));
        }
        let mut alpha = vec![0.0; m * n * 4];
        let mut offset = 0.0;
        for (x, row) in w.iter().enumerate() {
            for (y, &wxy) in row.iter().enumerate() {
                let base = (x * n + y) * 4;
                if wxy >= 0.0 {
                    alpha[base] = 2.0 * wxy;
                    alpha[base + 3] = 2.0 * wxy;
                } else {
                    alpha[base + 1] = -2.0 * wxy;
                    alpha[base + 2] = -2.0 * wxy;
                }
                offset -= wxy.abs();
            }
        }
        Self::new(m, n, alpha, offset)
    }

    /// `c₁₂ + c₂₁ + c₁₁ − c₂₂`.
    pub fn lgi() -> Self {
        Self::from_correlators(&LGI_SIGNS.map(|r| r.to_vec())).expect("fixed shape")
    }

    pub fn settings(&self) -> (usize, usize) {
        (self.m, self.n)
    }

    pub fn alpha(&self, a: i8, b: i8, x: usize, y: usize) -> f64 {
        let ai = usize::from(a < 0);
        let bi = usize::from(b < 0);
        self.alpha[((x * self.n + y) * 2 + ai) * 2 + bi]
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// Value on a deterministic strategy.
    pub fn deterministic_value(&self, s: &LhvStrategy) -> Result<f64> {
        if s.a.len() != self.m || s.b.len() != self.n {
            return Err(Error::BadDimension(format!(
                "strategy {}x{} for functional {}x{}",
                s.a.len(),
                s.b.len(),
                self.m,
                self.n
            )));
        }
        let mut acc = self.offset;
        for x in 0..self.m {
            for y in 0..self.n {
                acc += self.alpha(s.a[x], s.b[y], x, y);
            }
        }
        Ok(acc)
    }
}

/// Deterministic outcome assignment `a(x)`, `b(y)` with values `±1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LhvStrategy {
    pub a: Vec<i8>,
    pub b: Vec<i8>,
}

impl LhvStrategy {
    pub fn new(a: Vec<i8>, b: Vec<i8>) -> Result<Self> {
        if a.iter().chain(&b).any(|v| *v != 1 && *v != -1) {
            return Err(Error::OutOfRange("outcomes must be ±1".into()));
        }
        Ok(Self { a, b })
    }
}

/// Probabilistic mixture of deterministic strategies.
#[derive(Debug, Clone, PartialEq)]
pub struct LhvModel {
    mixture: Vec<(f64, LhvStrategy)>,
}

impl LhvModel {
    pub fn new(mixture: Vec<(f64, LhvStrategy)>) -> Result<Self> {
        let total: f64 = mixture.iter().map(|(p, _)| p).sum();
        if mixture.iter().any(|(p, _)| *p < 0.0 || !p.is_finite()) || (total - 1.0).abs() > 1e-12 {
            return Err(Error::OutOfRange(format!("mixture probabilities sum to {total}")));
        }
        Ok(Self { mixture })
    }

    pub fn value(&self, f: &BellFunctional) -> Result<f64> {
        self.mixture.iter().map(|(p, s)| Ok(p * f.deterministic_value(s)?)).sum()
    }
}

fn outcomes(bits: usize, len: usize) -> Vec<i8> {
    (0..len).map(|k| if bits >> k & 1 == 0 { 1 } else { -1 }).collect()
}

/// Exact maximum over all deterministic strategies.
pub fn lhv_bound(f: &BellFunctional) -> f64 {
    let mut best = f64::NEG_INFINITY;
    for ab in 0..1usize << f.m {
        for bb in 0..1usize << f.n {
            let s = LhvStrategy { a: outcomes(ab, f.m), b: outcomes(bb, f.n) };
            best = best.max(f.deterministic_value(&s).expect("shape matches"));
        }
    }
    best
}

/// Dichotomic observable assigned to a time label.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementSetting {
    observable: ComplexMatrix,
    time: TimeLabel,
}

impl MeasurementSetting {
    pub fn new(observable: ComplexMatrix, time: TimeLabel) -> Result<Self> {
        if !observable.is_finite() {
            return Err(Error::NonFinite);
        }
        let h = observable.hermiticity_defect();
        if h > SETTING_TOL {
            return Err(Error::NotHermitian(h));
        }
        let sq = &observable * &observable;
        let defect = sq.distance(&ComplexMatrix::identity(observable.dim()))?;
        if defect > SETTING_TOL {
            return Err(Error::NotDichotomic(defect));
        }
        Ok(Self { observable, time })
    }

    pub fn observable(&self) -> &ComplexMatrix {
        &self.observable
    }

    pub fn time(&self) -> TimeLabel {
        self.time
    }

    /// `(Π₊, Π₋) = ((I + O)/2, (I − O)/2)`.
    pub fn projectors(&self) -> (ComplexMatrix, ComplexMatrix) {
        let id = ComplexMatrix::identity(self.observable.dim());
        ((&id + &self.observable).scale_real(0.5), (&id - &self.observable).scale_real(0.5))
    }

    pub fn negated(&self) -> Self {
        Self { observable: self.observable.scale_real(-1.0), time: self.time }
    }
}

/// Real correlators `c_kl ∈ [−1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationTable {
    rows: Vec<Vec<f64>>,
}

impl CorrelationTable {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.first().map_or(0, Vec::len);
        if n == 0 || rows.iter().any(|r| r.len() != n) {
            return Err(Error::BadDimension("correlation table must be a non-empty rectangle".into()));
        }
        for v in rows.iter().flatten() {
            if !v.is_finite() {
                return Err(Error::NonFinite);
            }
            if v.abs() > 1.0 + 1e-10 {
                return Err(Error::OutOfRange(format!("correlator {v} outside [-1, 1]")));
            }
        }
        Ok(Self { rows })
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows.len(), self.rows[0].len())
    }

    pub fn get(&self, k: usize, l: usize) -> f64 {
        self.rows[k][l]
    }

    /// `Σ w_kl c_kl`.
    pub fn contract(&self, w: &[[f64; 2]; 2]) -> f64 {
        (0..2).flat_map(|i| (0..2).map(move |j| (i, j))).map(|(i, j)| w[i][j] * self.rows[i][j]).sum()
    }
}

fn check_dims(a: &MeasurementSetting, b: &MeasurementSetting, s: &BridgingSchedule) -> Result<()> {
    let d = s.grid().dim();
    if a.observable.dim() != d || b.observable.dim() != d {
        return Err(Error::DimensionMismatch(format!(
            "settings {}/{} on slot dimension {d}",
            a.observable.dim(),
            b.observable.dim()
        )));
    }
    if a.time >= b.time {
        return Err(Error::GridMismatch(format!("A at {} must precede B at {}", a.time, b.time)));
    }
    Ok(())
}

/// `Σ_{a,b} a·b·Tr[Π_b U Π_a ρ Π_a U†]` with `ρ` evolved from the first grid
/// label to A's time and `U = B(t_B, t_A)`.
pub fn sequential_correlator(
    a: &MeasurementSetting,
    b: &MeasurementSetting,
    s: &BridgingSchedule,
    rho0: &ComplexMatrix,
) -> Result<f64> {
    check_dims(a, b, s)?;
    rho0.check_density(1e-9)?;
    let start = s.grid().first();
    let pre = s.bridge(a.time, start)?;
    let rho = &(&pre * rho0) * &pre.adjoint();
    let u = s.bridge(b.time, a.time)?;
    let (pa_plus, pa_minus) = a.projectors();
    let (pb_plus, pb_minus) = b.projectors();
    let mut acc = 0.0;
    for (sa, pa) in [(1.0, &pa_plus), (-1.0, &pa_minus)] {
        let post = &(pa * &rho) * pa;
        let evolved = &(&u * &post) * &u.adjoint();
        for (sb, pb) in [(1.0, &pb_plus), (-1.0, &pb_minus)] {
            acc += sa * sb * (pb * &evolved).trace().re;
        }
    }
    Ok(acc)
}

/// `A₁, A₂` at the earlier time and `B₁, B₂` at the later time.
#[derive(Debug, Clone, PartialEq)]
pub struct LgiSettings {
    pub a: [MeasurementSetting; 2],
    pub b: [MeasurementSetting; 2],
}

impl LgiSettings {
    pub fn new(a1: MeasurementSetting, a2: MeasurementSetting, b1: MeasurementSetting, b2: MeasurementSetting) -> Self {
        Self { a: [a1, a2], b: [b1, b2] }
    }

    /// `A = Z, X` and `B = (Z ± X)/√2` on a qubit.
    pub fn qubit_optimal(t_a: TimeLabel, t_b: TimeLabel) -> Self {
        use crate::kernel::gates::{pauli_x, pauli_z};
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let plus = (&pauli_z() + &pauli_x()).scale_real(r);
        let minus = (&pauli_z() - &pauli_x()).scale_real(r);
        let m = |o: ComplexMatrix, t| MeasurementSetting::new(o, t).expect("dichotomic");
        Self::new(m(pauli_z(), t_a), m(pauli_x(), t_a), m(plus, t_b), m(minus, t_b))
    }
}

/// Table `c_ij = ⟨A_i, B_j⟩`.
pub fn correlation_table(
    settings: &LgiSettings,
    s: &BridgingSchedule,
    rho0: &ComplexMatrix,
) -> Result<CorrelationTable> {
    let mut rows = vec![vec![0.0; 2]; 2];
    for (i, a) in settings.a.iter().enumerate() {
        for (j, b) in settings.b.iter().enumerate() {
            rows[i][j] = sequential_correlator(a, b, s, rho0)?;
        }
    }
    CorrelationTable::new(rows)
}

/// `S = c₁₂ + c₂₁ + c₁₁ − c₂₂`.
pub fn lgi_value(settings: &LgiSettings, s: &BridgingSchedule, rho0: &ComplexMatrix) -> Result<f64> {
    Ok(correlation_table(settings, s, rho0)?.contract(&LGI_SIGNS))
}

/// Conjugates the slots at A's and B's times, `X ↦ A X A†`, then rescales to
/// unit bridged weight.
pub fn inject_measurements(
    h: &HistoryVector,
    a: &MeasurementSetting,
    b: &MeasurementSetting,
    s: &BridgingSchedule,
) -> Result<HistoryVector> {
    let grid = h.grid();
    grid.ensure_same(s.grid())?;
    if grid.len() != 2 {
        return Err(Error::GridMismatch(format!("injection needs a two-time history, got {grid}")));
    }
    if a.time != grid.first() || b.time != grid.last() {
        return Err(Error::GridMismatch(format!("settings at {}/{} on {grid}", a.time, b.time)));
    }
    check_dims(a, b, s)?;
    let conj = |m: &ComplexMatrix, o: &ComplexMatrix| &(o * m) * &o.adjoint();
    let terms = h
        .terms()
        .iter()
        .map(|(c, e)| {
            let e = e.with_slot(a.time, conj(e.slot(a.time)?, &a.observable))?;
            let e = e.with_slot(b.time, conj(e.slot(b.time)?, &b.observable))?;
            Ok((*c, e))
        })
        .collect::<Result<Vec<(C64, ElementaryHistory)>>>()?;
    let out = HistoryVector::new(grid.clone(), terms)?;
    let w = weight(&out, s)?;
    if w <= 1e-14 {
        return Err(Error::ZeroWeightHistory(w));
    }
    Ok(out.scale(C64::new(1.0 / w.sqrt(), 0.0)))
}

#[derive(Debug, Clone)]
pub struct SeesawOptions {
    /// Co-optimize the initial state; otherwise `ρ = I/d`.
    pub optimize_state: bool,
    /// Keep every setting diagonal in the computational basis.
    pub restrict_diagonal: bool,
    pub max_iterations: usize,
    pub tol: f64,
}

impl Default for SeesawOptions {
    fn default() -> Self {
        Self { optimize_state: false, restrict_diagonal: false, max_iterations: 1000, tol: 1e-10 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeesawRestart {
    pub index: usize,
    pub iterations: usize,
    pub value: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeesawResult {
    pub value: f64,
    pub settings: LgiSettings,
    pub rho: ComplexMatrix,
    pub converged: bool,
    pub best_restart: usize,
    pub restarts: Vec<SeesawRestart>,
}

fn anticomm_half(a: &ComplexMatrix, rho: &ComplexMatrix) -> ComplexMatrix {
    (&(a * rho) + &(rho * a)).scale_real(0.5)
}

fn diagonal_part(m: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix::diag(&(0..m.dim()).map(|k| m.get(k, k)).collect::<Vec<_>>())
}

struct SeesawState {
    a: [ComplexMatrix; 2],
    /// B in the frame of A's time, `U† B U`.
    bp: [ComplexMatrix; 2],
    rho: ComplexMatrix,
}

impl SeesawState {
    fn value(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..2 {
            let sym = anticomm_half(&self.a[i], &self.rho);
            for j in 0..2 {
                s += LGI_SIGNS[i][j] * (&self.bp[j] * &sym).trace().re;
            }
        }
        s
    }
}

fn seesaw_restart(
    dim: usize,
    u: &ComplexMatrix,
    seed: u64,
    index: usize,
    opts: &SeesawOptions,
) -> Result<(SeesawRestart, SeesawState)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    let sign = |m: &ComplexMatrix| -> Result<ComplexMatrix> {
        let m = if opts.restrict_diagonal { diagonal_part(m) } else { m.hermitian_part() };
        sign_operator(&m, 1e-9)
    };
    let start = |rng: &mut ChaCha8Rng| {
        if opts.restrict_diagonal {
            let v: Vec<f64> = (0..dim).map(|_| if rng.random_bool(0.5) { 1.0 } else { -1.0 }).collect();
            ComplexMatrix::diag_real(&v)
        } else {
            random_dichotomic(rng, dim)
        }
    };
    let a = [start(&mut rng), start(&mut rng)];
    let b = [start(&mut rng), start(&mut rng)];
    let to_frame = |m: &ComplexMatrix| &(&u.adjoint() * m) * u;
    let from_frame = |m: &ComplexMatrix| &(u * m) * &u.adjoint();
    let mut st = SeesawState {
        a,
        bp: [to_frame(&b[0]), to_frame(&b[1])],
        rho: ComplexMatrix::identity(dim).scale_real(1.0 / dim as f64),
    };
    let mut value = st.value();
    let mut converged = false;
    let mut iterations = 0;
    while iterations < opts.max_iterations {
        iterations += 1;
        for i in 0..2 {
            let e = (&st.bp[0].scale_real(LGI_SIGNS[i][0])) + &st.bp[1].scale_real(LGI_SIGNS[i][1]);
            st.a[i] = sign(&anticomm_half(&e, &st.rho))?;
        }
        for j in 0..2 {
            let d = &anticomm_half(&st.a[0], &st.rho).scale_real(LGI_SIGNS[0][j])
                + &anticomm_half(&st.a[1], &st.rho).scale_real(LGI_SIGNS[1][j]);
            st.bp[j] = to_frame(&sign(&from_frame(&d))?);
        }
        if opts.optimize_state {
            let mut g = ComplexMatrix::zeros(dim);
            for i in 0..2 {
                let e = (&st.bp[0].scale_real(LGI_SIGNS[i][0])) + &st.bp[1].scale_real(LGI_SIGNS[i][1]);
                g = &g + &anticomm_half(&st.a[i], &e);
            }
            let eig = hermitian_eig(&g.hermitian_part(), 1e-9)?;
            let v = eig.vector(0);
            st.rho = ComplexMatrix::outer(&v, &v)?;
        }
        let next = st.value();
        let moved = (next - value).abs();
        value = next;
        if moved < opts.tol {
            converged = true;
            break;
        }
    }
    Ok((SeesawRestart { index, iterations, value, converged }, st))
}

/// Alternating maximization of `S` over dichotomic settings (and optionally
/// the initial state); best of `restarts` seeded starts.
pub fn seesaw_maximize(dim: usize, s: &BridgingSchedule, restarts: usize, seed: u64) -> Result<SeesawResult> {
    seesaw_maximize_with(dim, s, restarts, seed, &SeesawOptions::default())
}

pub fn seesaw_maximize_with(
    dim: usize,
    s: &BridgingSchedule,
    restarts: usize,
    seed: u64,
    opts: &SeesawOptions,
) -> Result<SeesawResult> {
    if dim < 2 || s.grid().dim() != dim {
        return Err(Error::BadDimension(format!("dimension {dim} on {}", s.grid())));
    }
    if s.grid().len() < 2 {
        return Err(Error::GridMismatch("see-saw needs two times".into()));
    }
    if restarts == 0 {
        return Err(Error::OutOfRange("restarts must be at least 1".into()));
    }
    let (t_a, t_b) = (s.grid().first(), s.grid().last());
    let u = s.bridge(t_b, t_a)?;
    let runs =
        (0..restarts).into_par_iter().map(|r| seesaw_restart(dim, &u, seed, r, opts)).collect::<Result<Vec<_>>>()?;
    let best = runs.iter().enumerate().fold(0, |bi, (i, (rec, _))| if rec.value > runs[bi].0.value { i } else { bi });
    let (rec, st) = &runs[best];
    let from_frame = |m: &ComplexMatrix| &(&u * m) * &u.adjoint();
    let m = |o: ComplexMatrix, t| MeasurementSetting::new(o.hermitian_part(), t);
    let settings = LgiSettings::new(
        m(st.a[0].clone(), t_a)?,
        m(st.a[1].clone(), t_a)?,
        m(from_frame(&st.bp[0]), t_b)?,
        m(from_frame(&st.bp[1]), t_b)?,
    );
    Ok(SeesawResult {
        value: rec.value,
        settings,
        rho: st.rho.clone(),
        converged: rec.converged,
        best_restart: best,
        restarts: runs.iter().map(|(r, _)| r.clone()).collect(),
    })
}

/// Bell operator `Σ s_ij (U†B_jU) ⊗ A_iᵀ` on the two-slot space, later slot
/// first. Its expectation in `|Φ⁺⟩` is `S` at `ρ = I/d`.
pub fn lgi_operator(settings: &LgiSettings, s: &BridgingSchedule) -> Result<ComplexMatrix> {
    let d = s.grid().dim();
    let mut op = ComplexMatrix::zeros(d * d);
    for (i, a) in settings.a.iter().enumerate() {
        for (j, b) in settings.b.iter().enumerate() {
            check_dims(a, b, s)?;
            let u = s.bridge(b.time, a.time)?;
            let bp = &(&u.adjoint() * &b.observable) * &u;
            op = &op + &bp.kron(&a.observable.transpose()).scale_real(LGI_SIGNS[i][j]);
        }
    }
    Ok(op)
}

/// Largest eigenvalue of [`lgi_operator`].
pub fn operator_bound_check(settings: &LgiSettings, s: &BridgingSchedule) -> Result<f64> {
    let op = lgi_operator(settings, s)?;
    Ok(hermitian_eig(&op.hermitian_part(), 1e-9)?.values[0])
}

/// Unit vectors realizing a correlation table as inner products.
#[derive(Debug, Clone, PartialEq)]
pub struct TsirelsonVectors {
    pub x: Vec<Vec<f64>>,
    pub y: Vec<Vec<f64>>,
    /// `max |⟨x_k, y_l⟩ − c_kl|`.
    pub max_error: f64,
}

const COMPLETION_ITERS: usize = 200;
const COMPLETION_TOL: f64 = 1e-10;
const REALIZE_TOL: f64 = 1e-8;

/// PSD completion of `[[X, C], [Cᵀ, Y]]` with unit diagonal, factorized into
/// unit vectors and polished by Levenberg–Marquardt.
pub fn tsirelson_vectors(c: &CorrelationTable) -> Result<TsirelsonVectors> {
    let (m, n) = c.shape();
    if c.rows.iter().flatten().any(|v| v.abs() > 1.0) {
        return Err(Error::OutOfRange("correlators must lie in [-1, 1]".into()));
    }
    let size = m + n;
    let reset = |g: &mut DMatrix<f64>| {
        for k in 0..size {
            g[(k, k)] = 1.0;
        }
        for i in 0..m {
            for j in 0..n {
                g[(i, m + j)] = c.get(i, j);
                g[(m + j, i)] = c.get(i, j);
            }
        }
    };
    let mut g = DMatrix::<f64>::identity(size, size);
    reset(&mut g);
    for _ in 0..COMPLETION_ITERS {
        let eig = SymmetricEigen::new(g.clone());
        if eig.eigenvalues.min() >= -COMPLETION_TOL {
            break;
        }
        let clipped = eig.eigenvalues.map(|v| v.max(0.0));
        g = &eig.eigenvectors * DMatrix::from_diagonal(&clipped) * eig.eigenvectors.transpose();
        reset(&mut g);
    }
    // Start vectors: rows of V √Λ.
    let eig = SymmetricEigen::new(g);
    let root = eig.eigenvalues.map(|v| v.max(0.0).sqrt());
    let factor = &eig.eigenvectors * DMatrix::from_diagonal(&root);
    let mut p = DVector::<f64>::zeros(size * size);
    for r in 0..size {
        let row = factor.row(r);
        let norm = row.norm().max(1e-12);
        for k in 0..size {
            p[r * size + k] = row[k] / norm;
        }
    }
    let p = levenberg_marquardt(p, c, size);
    let vec_of = |r: usize| -> Vec<f64> {
        let v: Vec<f64> = (0..size).map(|k| p[r * size + k]).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.into_iter().map(|x| x / norm).collect()
    };
    let x: Vec<Vec<f64>> = (0..m).map(vec_of).collect();
    let y: Vec<Vec<f64>> = (0..n).map(|j| vec_of(m + j)).collect();
    let mut max_error: f64 = 0.0;
    for i in 0..m {
        for j in 0..n {
            let dot: f64 = x[i].iter().zip(&y[j]).map(|(a, b)| a * b).sum();
            max_error = max_error.max((dot - c.get(i, j)).abs());
        }
    }
    if max_error > REALIZE_TOL || !max_error.is_finite() {
        return Err(Error::Infeasible(max_error));
    }
    Ok(TsirelsonVectors { x, y, max_error })
}

/// Residuals: `⟨x_i, y_j⟩ − c_ij` then `|v_r|² − 1`.
fn lm_residuals(p: &DVector<f64>, c: &CorrelationTable, size: usize) -> DVector<f64> {
    let (m, n) = c.shape();
    let v = |r: usize| p.rows(r * size, size);
    let mut out = DVector::zeros(m * n + size);
    for i in 0..m {
        for j in 0..n {
            out[i * n + j] = v(i).dot(&v(m + j)) - c.get(i, j);
        }
    }
    for r in 0..size {
        out[m * n + r] = v(r).norm_squared() - 1.0;
    }
    out
}

fn lm_jacobian(p: &DVector<f64>, c: &CorrelationTable, size: usize) -> DMatrix<f64> {
    let (m, n) = c.shape();
    let mut jac = DMatrix::zeros(m * n + size, size * size);
    for i in 0..m {
        for j in 0..n {
            let row = i * n + j;
            for k in 0..size {
                jac[(row, i * size + k)] = p[(m + j) * size + k];
                jac[(row, (m + j) * size + k)] = p[i * size + k];
            }
        }
    }
    for r in 0..size {
        for k in 0..size {
            jac[(m * n + r, r * size + k)] = 2.0 * p[r * size + k];
        }
    }
    jac
}

fn levenberg_marquardt(mut p: DVector<f64>, c: &CorrelationTable, size: usize) -> DVector<f64> {
    let mut r = lm_residuals(&p, c, size);
    let mut cost = r.norm_squared();
    let mut mu = 1e-3;
    for _ in 0..500 {
        if cost < 1e-30 {
            break;
        }
        let jac = lm_jacobian(&p, c, size);
        let jt = jac.transpose();
        let jtj = &jt * &jac;
        let grad = &jt * &r;
        let mut improved = false;
        for _ in 0..30 {
            let mut a = jtj.clone();
            for k in 0..a.nrows() {
                a[(k, k)] += mu * (1.0 + jtj[(k, k)]);
            }
            let Some(chol) = a.cholesky() else {
                mu *= 10.0;
                continue;
            };
            let step = chol.solve(&(-&grad));
            let cand = &p + step;
            let rc = lm_residuals(&cand, c, size);
            let cc = rc.norm_squared();
            if cc < cost {
                p = cand;
                r = rc;
                cost = cc;
                mu = (mu * 0.3).max(1e-15);
                improved = true;
                break;
            }
            mu *= 10.0;
        }
        if !improved {
            break;
        }
    }
    p
}
