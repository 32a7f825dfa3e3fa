//! Pulsating fronts by long-time evolution: speed measurement, profile
//! extraction, the speed integral identity, tail rates, quenching
//! classification and period scans.

mod profile;
mod runner;
mod scan;
mod snapshots;
mod speed;

use thiserror::Error;

use crate::model::{HomogenizedData, ModelError};
use crate::pde::PdeError;

pub use profile::{
    extract_profile, fit_decay_rates, speed_identity, DecayFit, IdentityReport, ProfileLattice,
};
pub use runner::{
    compute_front_from, compute_pulsating_front, front_layout, FrontConfig, FrontDiagnostics,
    FrontLayout, FrontOutcome, FrontSolution, RunBudget,
};
pub(crate) use scan::fmt_num;
pub use scan::{
    classify_outcome, classify_quenching, quench_scan, scan_e, write_quench_csv, write_scan_csv,
    Classification, QuenchRecord, QuenchResult, QuenchScan, SweepRecord,
};
pub use snapshots::{Snapshot, SnapshotSeries};
pub use speed::{
    fit_level_speed, match_period, measure_speed, LevelFit, PeriodMatch, SpeedEstimate,
};

#[derive(Debug, Error)]
pub enum FrontError {
    #[error(transparent)]
    Pde(#[from] PdeError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("need at least {needed} level samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("snapshots too sparse or too short; record at least every {required_stride} time units over a full period")]
    InsufficientSnapshots { required_stride: f64 },
    #[error("operation needs a non-zero speed")]
    ZeroSpeed,
    #[error("empty profile lattice")]
    EmptyLattice,
    #[error("{side} tail spans fewer than 3 e-foldings above 1e-10; enlarge the xi window")]
    TailTooShort { side: &'static str },
    #[error("profile not converged: {0}")]
    ProfileNotConverged(String),
    #[error("invalid front configuration: {0}")]
    InvalidConfig(String),
}

/// Speed identity check on a converged, non-stationary front.
pub fn verify_speed_identity(
    front: &FrontSolution,
    homog: &HomogenizedData,
) -> Result<IdentityReport, FrontError> {
    if front.stationary {
        return Err(FrontError::ZeroSpeed);
    }
    speed_identity(&front.profile, front.speed, homog)
}

/// Front of the mirrored instance `x ↦ -x`. Read back in the original
/// variables it is a front with 0 on the left and 1 on the right moving
/// with the opposite speed.
pub fn mirrored_speed(
    inst: &crate::model::ProblemInstance,
    cfg: &FrontConfig,
    budget: &RunBudget,
) -> Result<FrontOutcome, FrontError> {
    compute_pulsating_front(&inst.mirrored(), cfg, budget)
}
