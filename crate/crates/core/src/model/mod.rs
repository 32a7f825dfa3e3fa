//! Coefficient and reaction profiles, hypothesis validation and averaged
//! quantities.

mod coefficient;
mod homogenized;
mod instance;
mod reaction;
mod table;

use thiserror::Error;

pub use coefficient::{CoefficientProfile, Diffusivity};
pub use homogenized::{
    corrector_chi, fbar_and_integral, harmonic_mean, Corrector, FBar, HarmonicMean, HomogenizedData,
};
pub use instance::{make_xin_example, ProblemInstance};
pub use reaction::{
    cubic_margins, Condition, LocalReaction, ReactionKind, ReactionProfile, ScalarField, ThetaMap,
    ValidationReport, Violation,
};
pub use table::{parse_table, read_table};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("{what} is not finite at y={y}, u={u}")]
    NonFinite { what: &'static str, y: f64, u: f64 },
    #[error("diffusivity must be positive, a({y}) = {value}")]
    NonPositiveDiffusivity { y: f64, value: f64 },
    #[error("theta({y}) = {theta} is outside ({delta}, {})", 1.0 - delta)]
    ThetaOutOfRange { y: f64, theta: f64, delta: f64 },
    #[error("bad table: {0}")]
    BadTable(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("reading table: {0}")]
    Io(#[from] std::io::Error),
}

/// Convenience: the cubic `u(1-u)(u-θ)` with θ constant.
pub fn make_cubic(theta: ThetaMap, gamma: f64, delta: f64) -> Result<ReactionProfile, ModelError> {
    ReactionProfile::cubic(theta, gamma, delta)
}

/// Validates (bistable)-type sign conditions and margins; see
/// [`ReactionProfile::validate`].
pub fn validate_hypotheses(
    reaction: &ReactionProfile,
    n_samples: usize,
) -> Result<ValidationReport, ModelError> {
    reaction.validate(n_samples)
}

pub fn extend_reaction(reaction: &ReactionProfile) -> ReactionProfile {
    reaction.extended()
}
