use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::history::{BridgingSchedule, ElementaryHistory, HistoryVector, TimeGrid, TimeLabel};
use crate::kernel::gates::{hadamard, pauli_x, pauli_y, pauli_z};
use crate::kernel::{mat_exp, ComplexMatrix, I_UNIT};

/// Version of the scenario text format.
pub const FORMAT_VERSION: &str = "1";

/// Largest slot dimension a scenario may declare.
pub const MAX_DIM: usize = 64;
/// Largest number of grid labels a scenario may declare.
pub const MAX_TIMES: usize = 16;

/// Fully resolved scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub name: String,
    pub grid: TimeGrid,
    /// User-declared operators in declaration order.
    pub operators: Vec<(String, ComplexMatrix)>,
    /// One entry per adjacent pair of grid labels; `None` is the identity.
    pub bridges: Vec<Option<BridgeSpec>>,
    pub histories: Vec<HistorySpec>,
    pub analyses: Vec<AnalysisSpec>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum BridgeSpec {
    Unitary(String),
    /// `exp(−i H · duration)`.
    Hamiltonian {
        operator: String,
        duration: f64,
    },
}

/// Amplitude-weighted slot lists on a subset of the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct HistorySpec {
    pub name: String,
    /// Increasing labels the history lives on.
    pub labels: Vec<TimeLabel>,
    /// Operator names aligned with `labels`.
    pub terms: Vec<(C64, Vec<String>)>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum AnalysisSpec {
    Consistency(ConsistencySpec),
    Reduce(ReduceSpec),
    Lgi(LgiSpec),
    Monogamy(MonogamySpec),
    MzDemo(MzDemoSpec),
}

impl AnalysisSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            Self::Consistency(_) => "consistency",
            Self::Reduce(_) => "reduce",
            Self::Lgi(_) => "lgi",
            Self::Monogamy(_) => "monogamy",
            Self::MzDemo(_) => "mz-demo",
        }
    }

    pub fn tol(&self) -> f64 {
        match self {
            Self::Consistency(a) => a.tol,
            Self::Reduce(a) => a.tol,
            Self::Lgi(a) => a.tol,
            Self::Monogamy(a) => a.tol,
            Self::MzDemo(a) => a.tol,
        }
    }

    pub fn set_tol(&mut self, tol: f64) {
        match self {
            Self::Consistency(a) => a.tol = tol,
            Self::Reduce(a) => a.tol = tol,
            Self::Lgi(a) => a.tol = tol,
            Self::Monogamy(a) => a.tol = tol,
            Self::MzDemo(a) => a.tol = tol,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConsistencySpec {
    pub histories: Vec<String>,
    pub coefficients: Option<Vec<C64>>,
    pub tol: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum BasisSpec {
    /// `|i⟩⟨j|` on a single traced label.
    MatrixUnits,
    /// `|k⟩⟨k|` on a single traced label.
    Computational,
    /// Named histories on the traced block.
    Histories(Vec<String>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReduceSpec {
    pub history: String,
    pub trace: Vec<TimeLabel>,
    pub basis: BasisSpec,
    pub target: Option<String>,
    pub expect_purity: Option<f64>,
    pub expect_fidelity: Option<f64>,
    pub tol: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LgiMode {
    /// Operator names for `A₁, A₂, B₁, B₂`.
    Settings([String; 4]),
    Seesaw {
        restarts: usize,
        seed: u64,
        optimize_state: bool,
        restrict_diagonal: bool,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct LgiSpec {
    pub mode: LgiMode,
    /// Times of the A and B measurements; grid ends by default.
    pub at: Option<(TimeLabel, TimeLabel)>,
    /// Initial state at the first grid label; maximally mixed by default.
    pub rho: Option<String>,
    pub expected: Option<f64>,
    pub tol: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonogamySpec {
    pub dim: usize,
    pub restarts: usize,
    pub seed: u64,
    pub threshold: f64,
    /// Archived regression value of the best objective.
    pub expected: Option<f64>,
    pub tol: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MzDemoSpec {
    pub tol: f64,
}

/// Built-in operator table: `I`, `X`, `Y`, `Z`, `H` and `P<k>`.
pub fn builtin_operator(name: &str, dim: usize) -> Option<ComplexMatrix> {
    match name {
        "I" => Some(ComplexMatrix::identity(dim)),
        "X" if dim == 2 => Some(pauli_x()),
        "Y" if dim == 2 => Some(pauli_y()),
        "Z" if dim == 2 => Some(pauli_z()),
        "H" if dim == 2 => Some(hadamard()),
        _ => {
            let digits = name.strip_prefix('P')?;
            if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) || digits.len() > 3 {
                return None;
            }
            ComplexMatrix::basis_projector(dim, digits.parse().ok()?).ok()
        }
    }
}

pub fn is_builtin_name(name: &str) -> bool {
    matches!(name, "I" | "X" | "Y" | "Z" | "H")
        || name.strip_prefix('P').is_some_and(|d| !d.is_empty() && d.bytes().all(|b| b.is_ascii_digit()))
}

impl ScenarioSpec {
    /// User operator of that name, else a built-in.
    pub fn operator(&self, name: &str) -> Option<ComplexMatrix> {
        self.operators
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, m)| m.clone())
            .or_else(|| builtin_operator(name, self.grid.dim()))
    }

    fn require_operator(&self, name: &str) -> Result<ComplexMatrix> {
        self.operator(name).ok_or_else(|| Error::BadDimension(format!("operator `{name}` does not resolve")))
    }

    pub fn schedule(&self) -> Result<BridgingSchedule> {
        let bridges = self
            .bridges
            .iter()
            .map(|b| match b {
                None => Ok(ComplexMatrix::identity(self.grid.dim())),
                Some(BridgeSpec::Unitary(n)) => self.require_operator(n),
                Some(BridgeSpec::Hamiltonian { operator, duration }) => {
                    mat_exp(&self.require_operator(operator)?.scale(-I_UNIT * *duration), 1e-13)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        BridgingSchedule::new(self.grid.clone(), bridges, 1e-9)
    }

    pub fn history_spec(&self, name: &str) -> Result<&HistorySpec> {
        self.histories.iter().find(|h| h.name == name).ok_or_else(|| Error::MissingHistory(name.to_string()))
    }

    /// History by name, on its own sub-grid.
    pub fn history(&self, name: &str) -> Result<HistoryVector> {
        let h = self.history_spec(name)?;
        let grid = self.grid.sub_grid(&h.labels)?;
        let terms = h
            .terms
            .iter()
            .map(|(c, ops)| {
                let slots = ops.iter().map(|n| self.require_operator(n)).collect::<Result<Vec<_>>>()?;
                Ok((*c, ElementaryHistory::from_earliest_first(grid.clone(), slots)?))
            })
            .collect::<Result<Vec<_>>>()?;
        HistoryVector::new(grid, terms)
    }

    /// Scenario schedule restricted to the grid of `h`.
    pub fn schedule_for(&self, h: &HistoryVector) -> Result<BridgingSchedule> {
        self.schedule()?.restrict(h.grid())
    }

    /// Overrides tolerances, seeds and restart counts of every analysis.
    pub fn apply_overrides(&mut self, tol: Option<f64>, seed: Option<u64>, restarts: Option<usize>) {
        for a in &mut self.analyses {
            if let Some(t) = tol {
                a.set_tol(t);
            }
            match a {
                AnalysisSpec::Monogamy(m) => {
                    if let Some(s) = seed {
                        m.seed = s;
                    }
                    if let Some(r) = restarts {
                        m.restarts = r;
                    }
                }
                AnalysisSpec::Lgi(LgiSpec { mode: LgiMode::Seesaw { restarts: r, seed: s, .. }, .. }) => {
                    if let Some(v) = seed {
                        *s = v;
                    }
                    if let Some(v) = restarts {
                        *r = v;
                    }
                }
                _ => {}
            }
        }
    }
}
