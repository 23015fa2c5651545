use thiserror::Error;

/// Errors produced by the simulator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A caller-supplied parameter is outside its admissible range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    /// A quantity that must hold by construction (unit norm, valid density
    /// matrix) drifted beyond tolerance.
    #[error("numerical invariant violated: {0}")]
    Invariant(String),
    /// The requested quantity is not defined for the given input.
    #[error("undefined: {0}")]
    Undefined(String),
    /// Too few points for a fit.
    #[error("need at least 10 points in the fit window, found {0}")]
    InsufficientPoints(usize),
    /// A trajectory record lacks data needed by the operation.
    #[error("missing data: {0}")]
    MissingData(String),
}

pub type Result<T> = std::result::Result<T, Error>;
