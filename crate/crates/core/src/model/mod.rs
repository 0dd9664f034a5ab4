//! Model functions, the regularized norm family and the free energy.

mod energy;
mod functions;
mod gamma;
mod params;

pub use energy::{gamma_cell, interfacial_energy, kwc_energy, EnergyBreakdown};
pub(crate) use energy::{corner_vector, corner_weight, gamma_cell_from_grad, singular_flux};
pub use functions::{
    validate_assumptions, AssumptionCheck, AssumptionReport, ClosureModel, ModelBounds, ModelFunctions, ModelSpec,
    ReferenceModel, DEFAULT_SAMPLES, DEFAULT_SAMPLE_RANGE,
};
pub use gamma::{gamma_eps, grad_gamma_eps, hess_gamma_eps};
pub(crate) use gamma::{gamma2, hess_gamma2};
pub use params::Parameters;
