//! Scripted numerical studies on top of `kwc-core`: energy dissipation,
//! regularization and damping limits, continuous dependence, ε-uniform `H²`
//! bounds and manufactured-solution convergence orders.

pub mod dissipation;
pub mod distance;
pub mod embedding;
pub mod gronwall;
pub mod h2;
pub mod limits;
pub mod manufactured;
pub mod report;
pub mod scenario;
pub mod table;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub use dissipation::{exp_energy_dissipation, DissipationConfig, DissipationReport};
pub use embedding::{estimate_embedding_constant, EmbeddingEstimate};
pub use gronwall::{
    exp_continuous_dependence, ContinuousDependenceConfig, ContinuousDependenceReport, GronwallReport, Perturbed,
};
pub use h2::{exp_h2_uniformity, BatteryEntry, H2UniformityConfig, H2UniformityReport};
pub use limits::{exp_epsilon_limit, exp_munu_limit, EpsilonLimitConfig, EpsilonLimitReport, MuNuLimitConfig, MuNuLimitReport};
pub use manufactured::{exp_manufactured_convergence, ExactPair, ManufacturedConfig, ManufacturedReport};
pub use report::{write_artifacts, Assertion, ExperimentReport};
pub use scenario::Scenario;
pub use table::ConvergenceTable;

use kwc_core::model::{validate_assumptions, ModelBounds, ModelFunctions, DEFAULT_SAMPLES, DEFAULT_SAMPLE_RANGE};

/// Model bounds sampled on the default window.
pub fn sampled_bounds<M: ModelFunctions<f64> + ?Sized>(model: &M) -> kwc_core::Result<ModelBounds<f64>> {
    Ok(validate_assumptions(model, DEFAULT_SAMPLE_RANGE, DEFAULT_SAMPLES)?.bounds)
}
