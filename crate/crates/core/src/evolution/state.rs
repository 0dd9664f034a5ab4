use serde::{Deserialize, Serialize};

use crate::calculus::ScalarField;
use crate::elliptic::SolveReport;
use crate::error::{Error, Result};
use crate::model::EnergyBreakdown;
use crate::scalar::Real;

/// The unknowns `(η, θ)` at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemState<T> {
    pub eta: ScalarField<T>,
    pub theta: ScalarField<T>,
    pub time: T,
}

impl<T: Real> SystemState<T> {
    pub fn new(eta: ScalarField<T>, theta: ScalarField<T>, time: T) -> Result<Self> {
        if !eta.grid().same_shape(theta.grid()) {
            return Err(Error::GridMismatch);
        }
        Ok(Self { eta, theta, time })
    }
}

/// Per-step diagnostics. The record at `t = 0` carries zero rates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepRecord<T> {
    pub time: T,
    pub energy: EnergyBreakdown<T>,
    /// `|Δη/dt|_H`
    pub rate_eta_h: T,
    pub rate_theta_h: T,
    /// `|Δη/dt|_V`
    pub rate_eta_v: T,
    pub rate_theta_v: T,
    /// `|∇Δη/dt|_{H^N}`
    pub grad_rate_eta: T,
    pub grad_rate_theta: T,
    /// `|u(t)|²_H` and `|v(t)|²_H` at the record time.
    pub u_norm_sq: T,
    pub v_norm_sq: T,
    /// Slack of the discrete energy inequality over the step ending here.
    pub s4_residual: T,
}

/// Solver reports of one step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepReports<T> {
    pub eta: SolveReport<T>,
    pub theta: SolveReport<T>,
    /// Re-evaluated residuals of the discrete equations, in resolvent scaling.
    pub eta_equation_residual: T,
    pub theta_equation_residual: T,
}

/// Snapshots at the configured stride plus a record for every step.
#[derive(Debug, Clone, Default)]
pub struct Trajectory<T> {
    pub snapshots: Vec<SystemState<T>>,
    pub records: Vec<StepRecord<T>>,
    pub solve_reports: Vec<StepReports<T>>,
}

impl<T: Real> Trajectory<T> {
    pub fn final_state(&self) -> Option<&SystemState<T>> {
        self.snapshots.last()
    }

    pub fn energies(&self) -> impl Iterator<Item = T> + '_ {
        self.records.iter().map(|r| r.energy.total)
    }
}
