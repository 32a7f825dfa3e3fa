//! Convergence of solutions to pulsating fronts: the co-moving frame and its
//! period map, lab-frame phase and rate fits, explicit super/subsolutions and
//! the spectrum of the linearized period map.

mod frame;
mod lab;
mod spectrum;
mod supersub;

use thiserror::Error;

pub use frame::{comoving_evolve, poincare_map, ComovingFrame, FrameConfig, FrameRun};
pub use lab::{
    global_stability_experiment, initialv2_experiment, StabilityConfig, StabilityReport,
};
pub use spectrum::{linearized_period_map, poincare_spectrum, spectrum_about, PoincareSpectrum};
pub use supersub::{build_supersub, SuperSubKind, SuperSubSolution};

#[derive(Debug, Error)]
pub enum StabilityError {
    #[error("the front is stationary; the co-moving frame needs c != 0")]
    Stationary,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("expected {expected} values, got {got}")]
    SizeMismatch { expected: usize, got: usize },
    #[error("non-finite state after step {step}")]
    NonFinite { step: usize },
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error(transparent)]
    Pde(#[from] crate::pde::PdeError),
    #[error(transparent)]
    Front(#[from] crate::fronts::FrontError),
    #[error(transparent)]
    Spectral(#[from] crate::spectral::SpectralError),
}
