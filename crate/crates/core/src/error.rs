use num_complex::Complex64;
use thiserror::Error;

/// Errors raised by the solver modules.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid curve: {0}")]
    InvalidCurve(String),

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("invalid coefficient: {0}")]
    InvalidCoefficient(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("frequency s = {s} is outside the admissible sector for alpha = {alpha}")]
    OutsideSector { s: Complex64, alpha: f64 },

    #[error("linear solver breakdown at pivot {pivot} (|d| = {magnitude:e})")]
    SolverBreakdown { pivot: usize, magnitude: f64 },

    #[error("temporal transform fails the decay check: {0}")]
    DecayFailure(String),

    #[error("rank-deficient inverse system: effective rank {rank} of {columns} unknowns")]
    RankDeficient { rank: usize, columns: usize },

    #[error("step budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("numerical invariant violated: {0}")]
    Invariant(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
