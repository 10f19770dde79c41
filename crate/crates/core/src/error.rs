use thiserror::Error;

/// Errors raised by operator algebra, tensor construction, tomography and fitting.
#[derive(Debug, Error)]
pub enum DropsError {
    #[error("spin index {index} out of range for {n_spins} spin(s)")]
    SpinIndexOutOfRange { index: usize, n_spins: usize },

    #[error("duplicate spin index {0}")]
    DuplicateSpin(usize),

    #[error("empty spin set")]
    EmptySpinSet,

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("matrix of size {rows}x{cols} is not 2^n x 2^n")]
    BadShape { rows: usize, cols: usize },

    #[error("operator is not unitary (deviation {0:.3e})")]
    NotUnitary(f64),

    #[error("operator is not Hermitian (deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("gradient is not unitary and has no propagator")]
    GradientNotUnitary,

    #[error("invalid pulse event: {0}")]
    InvalidEvent(String),

    #[error("invalid tensor index: {0}")]
    InvalidTensor(String),

    #[error("unsupported number of system spins {0} (only 1 or 2; LISA auxiliary labels are out of scope)")]
    UnsupportedSpins(usize),

    #[error("axis is not a unit vector (norm {0})")]
    NonUnitAxis(f64),

    #[error("no V transform registered for non-measurable term {0}")]
    MissingTransform(String),

    #[error("underdetermined fit: {nodes} nodes for {unknowns} unknowns")]
    Underdetermined { nodes: usize, unknowns: usize },

    #[error("ill-conditioned grid (condition number {0:.3e})")]
    IllConditioned(f64),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, DropsError>;
