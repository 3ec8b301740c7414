use thiserror::Error;

/// Errors raised by the numerical layers (kernel, histories, reductions,
/// monogamy and nonlocality). Scenario parsing has its own error type in
/// [`crate::scenario`].
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("bad dimension: {0}")]
    BadDimension(String),
    #[error("matrix contains non-finite entries")]
    NonFinite,
    #[error("matrix is not Hermitian (asymmetry {0:.3e})")]
    NotHermitian(f64),
    #[error("matrix is not unitary (defect {0:.3e})")]
    NotUnitary(f64),
    #[error("matrix is not a projector (defect {0:.3e})")]
    NotProjector(f64),
    #[error("matrix is not a density operator: {0}")]
    NotDensity(String),
    #[error("observable is not dichotomic (A^2 - I defect {0:.3e})")]
    NotDichotomic(f64),
    #[error("time grids overlap or interleave: {0}")]
    OverlappingGrids(String),
    #[error("time grid mismatch: {0}")]
    GridMismatch(String),
    #[error("history has zero weight (weight {0:.3e})")]
    ZeroWeightHistory(f64),
    #[error("traced basis is not an orthonormal consistent family: {0}")]
    IncompleteBasis(String),
    #[error("traced labels do not form a contiguous block: {0}")]
    NonContiguousBlock(String),
    #[error("reduced operator has zero trace")]
    ZeroTrace,
    #[error("bad subsystem selection: {0}")]
    BadSubsystem(String),
    #[error("value out of range: {0}")]
    OutOfRange(String),
    #[error("correlation table is not quantum realizable (residual {0:.3e})")]
    Infeasible(f64),
    #[error("state is not normalized (norm {0:.3e})")]
    NotNormalized(f64),
    #[error("history `{0}` is missing")]
    MissingHistory(String),
}

pub type Result<T> = std::result::Result<T, Error>;
