//! Conservative finite differences for `u_t = (a_L u_x)_x + f_L(x, u)` on a
//! truncated line with Dirichlet data, stepped by IMEX Euler or
//! Crank-Nicolson diffusion with explicit reaction.

mod datum;
mod grid;
mod solver;

use thiserror::Error;

pub use datum::{front_initial_datum, DatumStyle};
pub use grid::Grid1D;
pub(crate) use solver::level_crossing;
pub use solver::{evolve, residual_stationary, step, Field, Scheme, Solver, SolverConfig};

#[derive(Debug, Error)]
pub enum PdeError {
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error("non-finite value at node {node} after step {step}")]
    NonFinite { step: u64, node: usize },
    #[error("field has {got} nodes, grid has {expected}")]
    SizeMismatch { expected: usize, got: usize },
    #[error("implicit diffusion matrix is singular")]
    Singular,
}
