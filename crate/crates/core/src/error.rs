use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown subsystem label `{0}`")]
    UnknownLabel(String),

    #[error("duplicate subsystem label `{0}`")]
    DuplicateLabel(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("operator is not Hermitian (max |H - H^dag| = {0:.3e})")]
    NotHermitian(f64),

    #[error("operator is not positive semidefinite (smallest eigenvalue {0:.3e})")]
    NotPositive(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("operator dimension {dim} exceeds the {backend} budget of {limit}")]
    BudgetExceeded {
        backend: &'static str,
        dim: usize,
        limit: usize,
    },

    #[error("iterative eigensolver did not converge after {iterations} applications (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("dense eigendecomposition failed")]
    Eigensolver,

    #[error("map output has zero trace")]
    SingularOutput,

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
