use serde::{Deserialize, Serialize};

use crate::calculus::{div, grad, laplacian_neumann, norm_h, ScalarField};
use crate::elliptic::linear_resolvent_with;
use crate::elliptic::{singular_resolvent_with_guess, LinearResolventProblem, SingularResolventProblem, SolverOptions};
use crate::error::{Error, Result};
use crate::evolution::forcing::Forcings;
use crate::evolution::state::{StepReports, SystemState};
use crate::model::{gamma_cell, singular_flux, ModelFunctions, Parameters};
use crate::scalar::Real;

/// Relative bound on the re-evaluated step residuals.
pub const STEP_RESIDUAL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepperKind {
    Parabolic,
    PseudoParabolic,
}

/// Result of one time step.
#[derive(Debug, Clone)]
pub struct StepOutcome<T> {
    pub state: SystemState<T>,
    pub reports: StepReports<T>,
}

/// One step of the parabolic system; requires `μ = ν = 0`.
pub fn step_parabolic<T: Real, M: ModelFunctions<T> + ?Sized>(
    state: &SystemState<T>,
    model: &M,
    params: &Parameters<T>,
    forcings: &dyn Forcings<T>,
) -> Result<StepOutcome<T>> {
    if !params.is_parabolic() {
        return Err(Error::InvalidArgument(format!(
            "parabolic stepper needs mu = nu = 0, got mu = {}, nu = {}",
            params.mu, params.nu
        )));
    }
    advance(state, model, params, forcings, &SolverOptions::default())
}

/// One step of the damped system. With `μ = ν = 0` the result is bitwise
/// identical to [`step_parabolic`].
pub fn step_pseudo_parabolic<T: Real, M: ModelFunctions<T> + ?Sized>(
    state: &SystemState<T>,
    model: &M,
    params: &Parameters<T>,
    forcings: &dyn Forcings<T>,
) -> Result<StepOutcome<T>> {
    advance(state, model, params, forcings, &SolverOptions::default())
}

pub fn step<T: Real, M: ModelFunctions<T> + ?Sized>(
    kind: StepperKind,
    state: &SystemState<T>,
    model: &M,
    params: &Parameters<T>,
    forcings: &dyn Forcings<T>,
) -> Result<StepOutcome<T>> {
    match kind {
        StepperKind::Parabolic => step_parabolic(state, model, params, forcings),
        StepperKind::PseudoParabolic => step_pseudo_parabolic(state, model, params, forcings),
    }
}

/// Semi-implicit splitting: `η` first with the lower-order terms frozen at the
/// old state, then `θ` implicitly with the weights evaluated at the new `η`.
pub(crate) fn advance<T: Real, M: ModelFunctions<T> + ?Sized>(
    state: &SystemState<T>,
    model: &M,
    params: &Parameters<T>,
    forcings: &dyn Forcings<T>,
    opts: &SolverOptions,
) -> Result<StepOutcome<T>> {
    let grid = *state.eta.grid();
    let dt = params.dt;
    let t1 = state.time + dt;
    let (mu2, nu2) = (params.mu * params.mu, params.nu * params.nu);
    let u = forcings.u(t1, &grid);
    let v = forcings.v(t1, &grid);
    let eta = &state.eta;
    let theta = &state.theta;

    let gc = gamma_cell(theta, params.epsilon);
    let drive: Vec<T> = (0..grid.len())
        .map(|i| {
            let r = eta.values()[i];
            u.values()[i] - model.g(r) - model.alpha_d1(r) * gc.values()[i]
        })
        .collect();
    let mut z_eta = eta.clone();
    for (zi, &d) in z_eta.values_mut().iter_mut().zip(&drive) {
        *zi += dt * d;
    }
    let lap_eta = (mu2 > T::zero()).then(|| laplacian_neumann(eta));
    if let Some(l) = &lap_eta {
        z_eta.axpy(-mu2, l);
    }
    let eta_problem = LinearResolventProblem::unit_weight(mu2 + dt, z_eta);
    let (eta_new, eta_report) = linear_resolvent_with(&eta_problem, opts)?;
    if !eta_report.converged {
        return Err(Error::Solver(format!(
            "eta step at t = {t1}: residual {} > {}",
            eta_report.final_residual_h, eta_report.tolerance
        )));
    }

    let beta = eta_new.map(|r| model.alpha(r));
    let m = eta_new.map(|r| model.alpha0(r) / dt);
    if !(m.min_value() > T::zero()) {
        return Err(Error::Solver(format!("alpha0 vanishes at t = {t1}")));
    }
    let mut z_theta = v.clone();
    for ((zi, &mi), &th) in z_theta.values_mut().iter_mut().zip(m.values()).zip(theta.values()) {
        *zi += mi * th;
    }
    let lap_theta = (nu2 > T::zero()).then(|| laplacian_neumann(theta));
    if let Some(l) = &lap_theta {
        z_theta.axpy(-nu2 / dt, l);
    }
    let kappa_eff = if nu2 > T::zero() { params.kappa + nu2 / dt } else { params.kappa };
    let theta_problem = SingularResolventProblem { beta, kappa_eff, m, z: z_theta, epsilon: params.epsilon };
    let (theta_new, theta_report) = singular_resolvent_with_guess(&theta_problem, theta, opts)
        .map_err(|e| Error::Solver(format!("theta step at t = {t1}: {e}")))?;

    let new_state = SystemState { eta: eta_new, theta: theta_new, time: t1 };
    let (eta_res, theta_res) = equation_residuals(state, &new_state, model, params, &u, &v)?;
    let eta_scale = norm_h(&eta_problem.z) + T::one();
    let theta_scale = norm_h(&theta_problem.z) + T::one();
    let eta_rel = dt * eta_res / eta_scale;
    let theta_rel = theta_res / theta_scale;
    let tol = T::tol(STEP_RESIDUAL_TOL, 1e5);
    if !(eta_rel <= tol && theta_rel <= tol) {
        return Err(Error::Solver(format!(
            "step to t = {t1} fails the equation check: eta {eta_rel}, theta {theta_rel} (tolerance {tol})"
        )));
    }
    Ok(StepOutcome {
        state: new_state,
        reports: StepReports {
            eta: eta_report,
            theta: theta_report,
            eta_equation_residual: eta_rel,
            theta_equation_residual: theta_rel,
        },
    })
}

/// `H`-norms of the residuals of both discrete equations, assembled from the
/// difference operators rather than from the resolvent data.
pub fn equation_residuals<T: Real, M: ModelFunctions<T> + ?Sized>(
    old: &SystemState<T>,
    new: &SystemState<T>,
    model: &M,
    params: &Parameters<T>,
    u: &ScalarField<T>,
    v: &ScalarField<T>,
) -> Result<(T, T)> {
    let dt = params.dt;
    let (mu2, nu2) = (params.mu * params.mu, params.nu * params.nu);
    let d_eta = (&new.eta - &old.eta).map(|x| x / dt);
    let d_theta = (&new.theta - &old.theta).map(|x| x / dt);
    let gc = gamma_cell(&old.theta, params.epsilon);

    let mut r_eta = d_eta.clone();
    r_eta.axpy(-mu2, &laplacian_neumann(&d_eta));
    r_eta.axpy(-T::one(), &laplacian_neumann(&new.eta));
    for i in 0..r_eta.values().len() {
        let r = old.eta.values()[i];
        r_eta.values_mut()[i] += model.g(r) + model.alpha_d1(r) * gc.values()[i] - u.values()[i];
    }

    let beta: Vec<T> = new.eta.values().iter().map(|&r| model.alpha(r)).collect();
    let gr = grad(&new.theta);
    let mut flux = singular_flux(&beta, &gr, params.epsilon);
    for a in 0..gr.grid().dim() {
        for (f, &d) in flux.component_mut(a).iter_mut().zip(gr.component(a)) {
            *f += params.kappa * d;
        }
    }
    let div_flux = div(&flux);
    let mut r_theta = d_theta.clone();
    for i in 0..r_theta.values().len() {
        r_theta.values_mut()[i] *= model.alpha0(new.eta.values()[i]);
    }
    r_theta.axpy(-nu2, &laplacian_neumann(&d_theta));
    r_theta.axpy(-T::one(), &div_flux);
    r_theta.axpy(-T::one(), v);
    if !r_eta.is_finite() || !r_theta.is_finite() {
        return Err(Error::NonFinite("step residual"));
    }
    Ok((norm_h(&r_eta), norm_h(&r_theta)))
}
