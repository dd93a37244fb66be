use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported reduction: group {group} with {invariance} invariance")]
    UnsupportedCombination { group: String, invariance: String },

    #[error("non-finite value in {0}")]
    NonFiniteInput(&'static str),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("domain error: {0}")]
    DomainError(String),

    #[error("linear solve failed after {iterations} iterations (relative residual {relative_residual:.3e})")]
    LinearSolveFailure {
        iterations: usize,
        relative_residual: f64,
    },

    #[error("ellipticity lost: minimum symbol eigenvalue {lambda_min:.3e}")]
    EllipticityLoss { lambda_min: f64 },

    #[error("line search failed to reduce the residual (sup-norm {residual:.3e})")]
    LineSearchFailure { residual: f64 },

    #[error("Newton iteration did not converge in {iterations} steps (residual {residual:.3e})")]
    NewtonNotConverged { iterations: usize, residual: f64 },

    #[error("normalization violated: integral of exp(F) - 1 is {value:.3e}")]
    NormalizationViolation { value: f64 },

    #[error("continuation stalled at t = {t} (step {step:.3e} below minimum)")]
    ContinuationStalled { t: f64, step: f64 },

    #[error("seed cannot be scaled to a positive Monge-Ampere expression after {halvings} halvings")]
    DegenerateSeed { halvings: usize },

    #[error("invalid seed spec: {0}")]
    SeedSpec(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid value for `{field}`: {message}")]
    Validation { field: String, message: String },

    #[error("field file format: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
