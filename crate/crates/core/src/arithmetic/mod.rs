//! Arithmetic of frequency vectors: small divisors `σ_k`, Bruno sums,
//! arithmetic classes and their Monte-Carlo measure.

mod bruno;
mod class;
mod frequency;
mod lattice;
mod sigma;

pub use bruno::{
    bruno_partial_sums, finite_horizon_verdict, BrunoSequence, BrunoSummary, SeriesVerdict,
    CONVERGENCE_INCREMENT,
};
pub(crate) use bruno::summarise as summarise_series;
pub use class::{
    class_membership, measure_estimate, ArithmeticClassSpec, ClassFailure, ClassMembership,
    FrequencyBox, IndexConvention,
};
pub use frequency::{frequency_map, tau_for_frequency, FrequencyVector, ParameterPoint};
pub(crate) use frequency::validate_delta;
pub use lattice::{ball_size, LatticeNorm};
pub(crate) use lattice::for_each_in_ball;
pub use sigma::{sigma, sigma_profile, SigmaOptions, SigmaValue, DEFAULT_ENUMERATION_BUDGET};
