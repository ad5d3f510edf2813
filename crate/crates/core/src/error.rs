use thiserror::Error;

/// Errors raised by the boosting library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("hypothesis uses feature {feature} but data has {dim} columns")]
    DimensionMismatch { feature: usize, dim: usize },

    #[error("target {value} at index {index} is not +1 or -1")]
    NonBinaryTarget { index: usize, value: f64 },

    #[error("step size {0} outside the admissible range")]
    InvalidStep(f64),

    #[error("away step {gamma} exceeds the drop cap {cap}")]
    AwayStepTooLarge { gamma: f64, cap: f64 },

    #[error("atom {0} is not in the active set")]
    NotActive(usize),

    #[error("away step on a saturated atom (coefficient equals the capacity)")]
    SaturatedAwayAtom,

    #[error("residual vector is identically zero")]
    ZeroResidual,

    #[error("hypothesis is identically zero on the training set")]
    ZeroHypothesis,

    #[error("all sample weights are zero")]
    ZeroWeights,

    #[error("sample weights sum to {0}, expected 1")]
    UnnormalizedWeights(f64),

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("loss constant unavailable: {0}")]
    Unsupported(String),

    #[error("squared/lp loss constants need a declared target bound")]
    MissingTargetBound,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("empty atom list")]
    EmptyAtoms,

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("subsample of {0} points is too small to fit a stump")]
    SubsampleTooSmall(usize),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_len(expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::LengthMismatch { expected, actual })
    }
}
