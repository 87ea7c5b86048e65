use thiserror::Error;

/// Errors raised by the z2lab numerics.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Z2Error {
    #[error("invalid sequence: {0}")]
    InvalidSequence(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("inverse solver did not converge (residual {residual:e})")]
    NoConvergence { residual: f64 },

    #[error("eigensolver did not converge for a {0}x{0} matrix")]
    EigenNoConvergence(usize),

    #[error("block supports overlap at coordinate {0}")]
    DisjointnessViolated(usize),

    #[error("Hilbert matrix entry ({row}, {col}) hits the pole of 1/(i+j+lambda)")]
    PoleIndex { row: usize, col: usize },

    #[error("difference table loses {digits_lost:.1} significant digits at n = {n}")]
    PrecisionLoss { n: usize, digits_lost: f64 },

    #[error("parameter out of range: {0}")]
    ParameterOutOfRange(String),

    #[error("shift {0} is a section eigenvalue")]
    SingularShift(String),

    #[error("matrix of size {n} exceeds the configured cap {cap}")]
    TooLarge { n: usize, cap: usize },
}

pub type Result<T> = std::result::Result<T, Z2Error>;
