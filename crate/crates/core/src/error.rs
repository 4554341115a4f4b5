use thiserror::Error;

use crate::torus::MultiIndex;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KamError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid sequence: {0}")]
    InvalidSequence(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("morphism failed on sample {sample}: {message}")]
    MorphismFailed { sample: u64, message: String },

    #[error("scale {0} outside (0, 1)")]
    ScaleOutOfRange(f64),

    #[error("enumeration budget exceeded: {required} lattice points needed for radius {radius}, budget is {budget}")]
    ResourceExceeded {
        radius: u64,
        required: u128,
        budget: u128,
    },

    #[error("small divisor {divisor:e} at mode {witness} is below the floor {floor:e}")]
    Resonance {
        witness: MultiIndex,
        divisor: f64,
        floor: f64,
    },

    #[error("form is not closed: |I_{k} b_{l} - I_{l} b_{k}| = {defect:e} at mode {mode}")]
    NotClosed {
        mode: MultiIndex,
        k: usize,
        l: usize,
        defect: f64,
    },

    #[error("Lie series diverges: term norm grew for {consecutive} consecutive orders (last {last_norm:e})")]
    LieSeriesDivergence { consecutive: usize, last_norm: f64 },

    #[error("Lie series did not reach tolerance within {max_order} orders (last term {last_norm:e})")]
    LieSeriesNonConvergence { max_order: usize, last_norm: f64 },

    #[error("invalid report: {0}")]
    InvalidReport(String),
}

pub type Result<T> = std::result::Result<T, KamError>;
