//! Simulator for a periodic one-dimensional diffusion equation with
//! Dirac-delta forcing and threshold-triggered rupture resets.
//!
//! The layer thickness `eta` (or the pair `h`, `zeta` in the coupled model)
//! evolves on the circle `R / omega Z`. When `min eta` reaches `eta_c`, every
//! junction interval touching the rupture set is reset to `eta_a`. The
//! rupture-to-rupture return map is iterated to find periodic orbits.

pub mod cli;
pub mod config;
pub mod error;
pub mod io;
pub mod periodic;
pub mod rupture;
pub mod solver;
pub mod stationary;

pub use config::{load_scenario, validate, Mode, ModelConfig, Numerics, ReductionCase, ValidationReport};
pub use error::{Error, ErrorKind, Result};
pub use periodic::{
    find_periodic, gradient_probe, poincare_map, verify_periodic, ConvergenceReport, GradientProbe, PoincareMap,
    VerifyReport,
};
pub use rupture::{
    apply_reset, locate_crossing, rupture_intervals, rupture_time_bounds, run_with_rupture, BoundsReport,
    RuptureEvent, RuptureRun, Stop,
};
pub use solver::{Field, Grid, Operators, State};
pub use stationary::{
    check_condition_s, eval_stationary, solve_stationary, solve_stationary_alpha0, SReport, StationaryProfile,
};
