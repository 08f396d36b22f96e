use thiserror::Error;

/// Errors raised anywhere in the discretization pipeline.
#[derive(Debug, Error)]
pub enum VtdError {
    #[error("precision of {0} bits is below the supported minimum of 128")]
    PrecisionTooLow(u32),

    #[error("singular matrix: pivot {pivot:.3e} below threshold {threshold:.3e} at column {column}")]
    SingularMatrix {
        column: usize,
        pivot: f64,
        threshold: f64,
    },

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("invalid node set: {0}")]
    InvalidNodeSet(String),

    #[error("invalid method parameters: {0}")]
    InvalidMethod(String),

    #[error("defining system is singular for r={r}, k={k}: {detail}")]
    AssumptionViolated { r: usize, k: usize, detail: String },

    #[error("total derivative of order {requested} requested, problem supplies partials up to order {available}")]
    TotalDerivativeUnavailable { requested: usize, available: usize },

    #[error("Newton iteration diverged on interval {interval} after {iterations} iterations (residual {residual:.3e})")]
    NewtonDiverged {
        interval: usize,
        iterations: usize,
        residual: f64,
    },

    #[error("singular Jacobian on interval {interval}")]
    SingularJacobian { interval: usize },

    #[error("time {0} lies outside the solution domain")]
    OutOfDomain(f64),

    #[error("problem '{0}' has no exact solution")]
    ExactSolutionMissing(String),

    #[error("error value is zero or below solver tolerance; order is meaningless")]
    ZeroError,

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("unknown case '{0}'")]
    UnknownCase(String),

    #[error("unknown problem '{0}'")]
    UnknownProblem(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T, E = VtdError> = std::result::Result<T, E>;
