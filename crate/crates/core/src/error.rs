use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HjError {
    #[error("invalid interval ({left}, {right}): left must be < right")]
    InvalidInterval { left: f64, right: f64 },

    #[error("unsupported interval ({left}, {right}); only (-1, 1) and (0, 1) are supported")]
    UnsupportedInterval { left: f64, right: f64 },

    #[error("grid needs at least {min} cells, got {got}")]
    TooFewCells { min: usize, got: usize },

    #[error("composite Simpson quadrature needs an even number of cells, got {0}")]
    OddCellCount(usize),

    #[error("grid functions live on different grids")]
    GridMismatch,

    #[error("expected {expected} values, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("field is not Dirichlet: boundary values must be exactly 0")]
    NotDirichlet,

    #[error("field has negative values (min {0})")]
    NegativeField(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("time must be non-negative, got {0}")]
    NegativeTime(f64),

    #[error("initial datum is identically zero; ratio undefined")]
    ZeroDatum,

    #[error("non-finite value at step {step} (t = {time}); CFL violation or gradient blow-up")]
    NonFinite { step: usize, time: f64 },

    #[error("Cole-Hopf argument 1 + e^(t Delta) U0 is not positive (min {0})")]
    ColeHopfPositivity(f64),

    #[error("series tail bound {bound:e} exceeds tolerance {tol:e}; need at least {needed} modes")]
    SeriesTruncation { bound: f64, tol: f64, needed: usize },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("root bracket [{lo}, {hi}] does not enclose a sign change")]
    NoBracket { lo: f64, hi: f64 },
}

pub type Result<T> = std::result::Result<T, HjError>;
