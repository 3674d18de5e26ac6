//! Periodic P1 / lumped-mass discretization with backward-Euler stepping.

mod fourier;
mod grid;
mod operators;
mod step;
mod tridiag;

pub use fourier::fourier_reference;
pub use grid::{build_grid, sup_diff, Field, Grid};
pub use operators::{assemble_operators, hat_weights, Operators};
pub use step::{evolve, step_coupled, step_decoupled, State, Stepper};
pub(crate) use step::set_time;
pub use tridiag::PeriodicTridiagonal;
