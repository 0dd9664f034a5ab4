//! Resolvents of the Neumann Laplacian and of the weighted singular-diffusion
//! operator.

mod cg;
mod h2;
mod linear;
mod singular;

use serde::{Deserialize, Serialize};

pub use h2::check_h2_bound;
pub use linear::{linear_resolvent, LinearResolventProblem};
pub(crate) use linear::linear_resolvent_with;
pub use singular::{singular_residual, singular_resolvent, singular_resolvent_with_guess, SingularResolventProblem};

/// Solver diagnostics, serialized into run manifests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport<T> {
    pub method: SolveMethod,
    /// Outer (nonlinear) iterations; equals inner iterations for linear solves.
    pub iterations: usize,
    pub inner_iterations: usize,
    pub final_residual_h: T,
    pub tolerance: T,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveMethod {
    Pointwise,
    ConjugateGradient,
    Newton,
    /// Newton along a decreasing sequence of regularization parameters.
    NewtonContinuation,
    LaggedDiffusivity,
}

/// Iteration limits and tolerances of the resolvent solvers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverOptions {
    /// Nonlinear residual target, relative to `|z|_H + 1`.
    pub nonlinear_rel_tol: f64,
    /// Linear residual target, relative to the right-hand side.
    pub linear_rel_tol: f64,
    /// Inner conjugate-gradient tolerance.
    pub cg_rel_tol: f64,
    pub newton_max_iter: usize,
    pub fixed_point_max_iter: usize,
    /// Skip Newton and go straight to lagged diffusivity.
    pub force_fixed_point: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            nonlinear_rel_tol: 1e-10,
            linear_rel_tol: 1e-10,
            cg_rel_tol: 1e-12,
            newton_max_iter: 50,
            fixed_point_max_iter: 500,
            force_fixed_point: false,
        }
    }
}

pub(crate) fn cg_max_iter(n: usize) -> usize {
    20 * n + 200
}
