use thiserror::Error;

use crate::fronts::FrontError;
use crate::homogenize::HomogenizeError;
use crate::model::ModelError;
use crate::pde::PdeError;
use crate::spectral::SpectralError;
use crate::stability::StabilityError;

/// Umbrella error for callers that drive several stages.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Pde(#[from] PdeError),
    #[error(transparent)]
    Front(#[from] FrontError),
    #[error(transparent)]
    Homogenize(#[from] HomogenizeError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Stability(#[from] StabilityError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
