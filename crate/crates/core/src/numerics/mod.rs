//! Small numerical kernels shared by the solvers: banded solves, quadrature,
//! periodic splines, an adaptive ODE stepper and scalar root/min finders.

mod fit;
mod ode;
mod quad;
mod roots;
mod spline;
mod tridiag;

pub use fit::{linear_fit, LinearFit};
pub use ode::{Dopri5, OdeEvent, OdeOutcome, OdeSample};
pub use quad::{simpson, simpson_periodic, QuadratureValue};
pub use roots::{bisect, golden_section_min, RootError};
pub use spline::{cubic_hermite, PeriodicSpline};
pub use tridiag::{solve_cyclic_tridiagonal, FactoredTridiagonal, Tridiagonal};
