//! Principal eigenvalues of linearized operators, periodic steady states and
//! the exponential decay rates of fronts.

mod decay;
mod eigen;
mod steady;

use thiserror::Error;

pub use decay::{
    decay_estimate, decay_root_mu, DecayBranch, DecayEstimate, DecayRoot, DecayRootConfig,
};
pub use eigen::{
    dirichlet_principal_eigen, periodic_principal_eigen, principal_eigenpair, stability_limit,
    Boundary, EigenPair, StabilityTrace,
};
pub use steady::{
    default_seeds, find_periodic_steady_states, NewtonConfig, Seed, SeedFailure, StabilityClass,
    SteadySearch, SteadyState,
};

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error("inverse iteration did not converge in {iterations} steps (bracket width {width})")]
    NoConvergence { iterations: usize, width: f64 },
    #[error("eigenvector lost positivity")]
    LostPositivity,
    #[error("singular shifted system")]
    Singular,
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("principal eigenvalue of T_mu has no sign change below mu = {mu_max}")]
    NoSignChange { mu_max: f64 },
    #[error("eigenvalue trace decreases by {drop} at R = {r}")]
    NonMonotone { r: f64, drop: f64 },
    #[error(transparent)]
    Model(#[from] crate::model::ModelError),
    #[error(transparent)]
    Front(#[from] crate::fronts::FrontError),
}
