//! The averaged travelling wave `a_H φ₀'' + c₀ φ₀' + f̄(φ₀) = 0` by shooting,
//! its decay exponents, and the convergence of pulsating fronts to it as the
//! period shrinks.

mod shooting;
mod sweep;

use thiserror::Error;

use crate::fronts::FrontError;
use crate::model::ModelError;

pub use shooting::{
    homogenized_decay_rates, solve_homogenized_front, HomogenizedFront, ShootingConfig,
};
pub use sweep::{
    align_profiles, homogenization_sweep, write_sweep_csv, Alignment, HomogSweepRecord,
    HomogSweepReport,
};

#[derive(Debug, Error)]
pub enum HomogenizeError {
    #[error("f̄'(0) = {fp0} and f̄'(1) = {fp1} must both be negative")]
    NotBistable { fp0: f64, fp1: f64 },
    #[error("f̄ has no interior zero")]
    NoInteriorZero,
    #[error("no sign change of the shooting functional on [-{c_max}, {c_max}]")]
    NoSignChange { c_max: f64 },
    #[error("the shooting trajectory does not reach 0 (closest approach {closest}); no 1-to-0 connection")]
    NoConnection { closest: f64 },
    #[error("ODE integration failed at c = {c}")]
    IntegrationFailed { c: f64 },
    #[error("the averaged speed is zero; use the period scan for the stationary branch")]
    ZeroSpeed,
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Front(#[from] FrontError),
}
