//! Time stepping of the coupled `(η, θ)` system.

mod forcing;
mod initial;
mod run;
mod state;
mod stepper;

pub use forcing::{ConstantForcing, FnForcing, Forcings, TabulatedForcing, ZeroForcing};
pub use initial::{initial_velocities, prepare_initial_theta, CosineMode, InitialProfile};
pub use run::{
    energy_inequality_residual, run, s4_step_residual, write_timeseries, RunFailure, RunOptions, TIMESERIES_HEADER,
};
pub use state::{StepRecord, StepReports, SystemState, Trajectory};
pub use stepper::{equation_residuals, step, step_parabolic, step_pseudo_parabolic, StepOutcome, StepperKind, STEP_RESIDUAL_TOL};
