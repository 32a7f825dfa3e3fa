//! Numerical laboratory for pulsating fronts of the spatially periodic
//! bistable reaction-diffusion equation
//!
//! ```text
//! u_t = (a(x/L) u_x)_x + f(x/L, u),     x ∈ ℝ, t > 0,
//! ```
//!
//! where `a` is a positive 1-periodic diffusivity and `f(y, ·)` is bistable
//! between the stable states 0 and 1 for every `y`.
//!
//! The crate is organised by stage:
//!
//! * [`model`]: coefficient and reaction profiles, hypothesis checks and the
//!   averaged (homogenized) data `a_H`, `f̄`, the corrector `χ`.
//! * [`pde`]: conservative finite differences and IMEX time stepping.
//! * [`fronts`]: pulsating fronts by long-time evolution, speed measurement,
//!   profile extraction, quenching classification and period scans.
//! * [`homogenize`]: the homogenized travelling wave by shooting and the
//!   convergence of pulsating fronts towards it as `L → 0`.
//! * [`spectral`]: principal eigenvalues, periodic steady states and decay
//!   exponents of front tails.
//! * [`stability`]: co-moving frame, Poincaré map, phase-shift convergence
//!   experiments and explicit super/subsolutions.

// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod fronts;
pub mod homogenize;
pub mod io;
pub mod model;
pub mod numerics;
pub mod pde;
pub mod spectral;
pub mod stability;

pub use error::{Error, Result};
pub use model::{CoefficientProfile, HomogenizedData, ProblemInstance, ReactionProfile};
