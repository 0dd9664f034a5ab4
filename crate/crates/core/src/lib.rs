//! Finite-difference solvers for Kobayashi–Warren–Carter grain-boundary
//! systems with an order-parameter dependent mobility.
//!
//! Everything numerical is generic over [`Real`] (`f32` or `f64`). The `*64`
//! aliases below fix the scalar to `f64`, which is what the experiments and
//! the command-line tool use.

pub mod calculus;
pub mod elliptic;
pub mod error;
pub mod evolution;
pub mod model;
pub mod scalar;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub use error::{Error, Result};
pub use scalar::Real;

pub type Grid64 = calculus::Grid<f64>;
pub type ScalarField64 = calculus::ScalarField<f64>;
pub type VectorField64 = calculus::VectorField<f64>;
pub type Parameters64 = model::Parameters<f64>;
pub type ReferenceModel64 = model::ReferenceModel<f64>;
pub type ModelBounds64 = model::ModelBounds<f64>;
pub type EnergyBreakdown64 = model::EnergyBreakdown<f64>;
pub type SolveReport64 = elliptic::SolveReport<f64>;
pub type SystemState64 = evolution::SystemState<f64>;
pub type Trajectory64 = evolution::Trajectory<f64>;
