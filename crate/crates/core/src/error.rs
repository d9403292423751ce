use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AmcError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("invalid matrix shape {rows}x{cols}: {reason}")]
    InvalidShape {
        rows: usize,
        cols: usize,
        reason: String,
    },

    #[error("eigenvalue iteration did not converge after {iterations} iterations")]
    NoConvergence { iterations: usize },

    #[error("matrix of dimension {dim} exceeds the eigensolver cap of {cap}")]
    TooLarge { dim: usize, cap: usize },

    #[error("singular matrix: pivot {pivot:e} below threshold {threshold:e}")]
    Singular { pivot: f64, threshold: f64 },

    #[error("negative entry {value} at ({row}, {col}); split the matrix first")]
    NegativeEntry { row: usize, col: usize, value: f64 },

    #[error(
        "entry {value} at ({row}, {col}) maps to {conductance:e} S, outside the device window \
         [{g_min:e}, {g_max:e}] S (max feasible scale {max_scale:e})"
    )]
    WindowOverflow {
        row: usize,
        col: usize,
        value: f64,
        conductance: f64,
        g_min: f64,
        g_max: f64,
        max_scale: f64,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{0}")]
    Precondition(String),

    #[error("no linear steady state for a self-sustained eigenvector circuit")]
    NoLinearSteadyState,

    #[error("step size underflow: {steps} steps required, cap is {max_steps}")]
    StepUnderflow { steps: u64, max_steps: u64 },

    #[error("non-finite state at step {step}")]
    NonFinite { step: usize },

    #[error("trajectory has not settled")]
    NotSettled,

    #[error("reference vector has zero norm")]
    ZeroReference,

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, AmcError>;
