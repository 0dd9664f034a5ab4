use std::fmt;
use std::io::Write;

use crate::calculus::{dirichlet_sq, norm_h, ScalarField};
use crate::elliptic::SolverOptions;
use crate::error::{Error, Result};
use crate::evolution::forcing::Forcings;
use crate::evolution::state::{StepRecord, SystemState, Trajectory};
use crate::evolution::stepper::{advance, StepperKind};
use crate::model::{kwc_energy, validate_assumptions, ModelFunctions, Parameters, DEFAULT_SAMPLES, DEFAULT_SAMPLE_RANGE};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy)]
pub struct RunOptions<T> {
    /// Keep every `snapshot_stride`-th state; the final state is always kept.
    pub snapshot_stride: usize,
    /// Lower bound of `α₀` used in the energy-inequality slack; sampled from
    /// the model when absent.
    pub delta_alpha: Option<T>,
    pub solver: SolverOptions,
}

impl<T> Default for RunOptions<T> {
    fn default() -> Self {
        Self { snapshot_stride: 1, delta_alpha: None, solver: SolverOptions::default() }
    }
}

/// A run that stopped early, with everything computed before the failure.
#[derive(Debug)]
pub struct RunFailure<T> {
    pub partial: Trajectory<T>,
    /// Index of the step that failed (1-based); 0 for setup errors.
    pub step: usize,
    pub error: Error,
}

impl<T> fmt::Display for RunFailure<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "run failed at step {}: {}", self.step, self.error)
    }
}

impl<T: fmt::Debug> std::error::Error for RunFailure<T> {}

fn sq<T: Real>(x: T) -> T {
    x * x
}

/// Slack of the discrete energy inequality over one step:
/// `F_n - F_{n+1} + dt(½|u|² + |v|²/(2δ)) - dt(¼|Dη|² + μ²|∇Dη|² + (δ/2)|Dθ|² + ν²|∇Dθ|²)`
/// with `D = Δ/dt` and the forcing taken at the end of the step.
pub fn s4_step_residual<T: Real>(prev: &StepRecord<T>, cur: &StepRecord<T>, params: &Parameters<T>, delta_alpha: T) -> T {
    let dt = params.dt;
    let half = T::lit(0.5);
    let supply = half * cur.u_norm_sq + cur.v_norm_sq / (T::lit(2.0) * delta_alpha);
    let dissipation = T::lit(0.25) * sq(cur.rate_eta_h)
        + sq(params.mu) * sq(cur.grad_rate_eta)
        + half * delta_alpha * sq(cur.rate_theta_h)
        + sq(params.nu) * sq(cur.grad_rate_theta);
    prev.energy.total - cur.energy.total + dt * supply - dt * dissipation
}

/// Per-step energy-inequality slack recomputed from the records; a negative
/// entry marks a violated step.
pub fn energy_inequality_residual<T: Real>(traj: &Trajectory<T>, params: &Parameters<T>, delta_alpha: T) -> Vec<T> {
    traj.records.windows(2).map(|w| s4_step_residual(&w[0], &w[1], params, delta_alpha)).collect()
}

fn record<T: Real, M: ModelFunctions<T> + ?Sized>(
    prev: Option<(&SystemState<T>, &StepRecord<T>)>,
    cur: &SystemState<T>,
    model: &M,
    params: &Parameters<T>,
    forcings: &dyn Forcings<T>,
    delta_alpha: T,
) -> Result<StepRecord<T>> {
    let grid = *cur.eta.grid();
    let energy = kwc_energy(&cur.eta, &cur.theta, model, params)?;
    let (u_norm_sq, v_norm_sq) = if forcings.is_zero() {
        (T::zero(), T::zero())
    } else {
        (sq(norm_h(&forcings.u(cur.time, &grid))), sq(norm_h(&forcings.v(cur.time, &grid))))
    };
    let mut rec = StepRecord {
        time: cur.time,
        energy,
        rate_eta_h: T::zero(),
        rate_theta_h: T::zero(),
        rate_eta_v: T::zero(),
        rate_theta_v: T::zero(),
        grad_rate_eta: T::zero(),
        grad_rate_theta: T::zero(),
        u_norm_sq,
        v_norm_sq,
        s4_residual: T::zero(),
    };
    if let Some((old, prev_rec)) = prev {
        let rate = |a: &ScalarField<T>, b: &ScalarField<T>| (a - b).map(|x| x / params.dt);
        let de = rate(&cur.eta, &old.eta);
        let dth = rate(&cur.theta, &old.theta);
        rec.rate_eta_h = norm_h(&de);
        rec.rate_theta_h = norm_h(&dth);
        rec.grad_rate_eta = dirichlet_sq(&de).sqrt();
        rec.grad_rate_theta = dirichlet_sq(&dth).sqrt();
        rec.rate_eta_v = (sq(rec.rate_eta_h) + sq(rec.grad_rate_eta)).sqrt();
        rec.rate_theta_v = (sq(rec.rate_theta_h) + sq(rec.grad_rate_theta)).sqrt();
        rec.s4_residual = s4_step_residual(prev_rec, &rec, params, delta_alpha);
    }
    Ok(rec)
}

/// Integrates from `initial` to `initial.time + T`.
pub fn run<T: Real, M: ModelFunctions<T> + ?Sized>(
    initial: &SystemState<T>,
    model: &M,
    params: &Parameters<T>,
    forcings: &dyn Forcings<T>,
    kind: StepperKind,
    opts: &RunOptions<T>,
) -> std::result::Result<Trajectory<T>, RunFailure<T>> {
    let mut traj = Trajectory::default();
    let setup = || -> Result<(usize, T)> {
        params.validate()?;
        if kind == StepperKind::Parabolic && !params.is_parabolic() {
            return Err(Error::InvalidArgument("parabolic stepper needs mu = nu = 0".into()));
        }
        if opts.snapshot_stride == 0 {
            return Err(Error::InvalidArgument("snapshot stride must be at least 1".into()));
        }
        if !initial.eta.grid().same_shape(initial.theta.grid()) {
            return Err(Error::GridMismatch);
        }
        let delta = match opts.delta_alpha {
            Some(d) => d,
            None => {
                let range = (T::lit(DEFAULT_SAMPLE_RANGE.0), T::lit(DEFAULT_SAMPLE_RANGE.1));
                validate_assumptions(model, range, DEFAULT_SAMPLES)?.bounds.delta_alpha
            }
        };
        Ok((params.step_count()?, delta))
    };
    let (steps, delta) = match setup() {
        Ok(v) => v,
        Err(error) => return Err(RunFailure { partial: traj, step: 0, error }),
    };
    let first = match record(None, initial, model, params, forcings, delta) {
        Ok(r) => r,
        Err(error) => return Err(RunFailure { partial: traj, step: 0, error }),
    };
    traj.records.push(first);
    traj.snapshots.push(initial.clone());
    let mut state = initial.clone();
    for n in 1..=steps {
        let outcome = advance(&state, model, params, forcings, &opts.solver).and_then(|out| {
            let rec = record(Some((&state, traj.records.last().expect("initial record"))), &out.state, model, params, forcings, delta)?;
            Ok((out, rec))
        });
        let (out, rec) = match outcome {
            Ok(v) => v,
            Err(error) => {
                if traj.snapshots.last().map(|s| s.time) != Some(state.time) {
                    traj.snapshots.push(state);
                }
                return Err(RunFailure { partial: traj, step: n, error });
            }
        };
        traj.records.push(rec);
        traj.solve_reports.push(out.reports);
        state = out.state;
        if n % opts.snapshot_stride == 0 || n == steps {
            traj.snapshots.push(state.clone());
        }
    }
    Ok(traj)
}

pub const TIMESERIES_HEADER: &str =
    "t,E_dirichlet,E_potential,E_interfacial,E_total,rate_eta_H,rate_theta_H,rate_eta_V,rate_theta_V,s4_residual";

pub fn write_timeseries<T: Real, W: Write>(records: &[StepRecord<T>], mut out: W) -> Result<()> {
    writeln!(out, "{TIMESERIES_HEADER}")?;
    for r in records {
        writeln!(
            out,
            "{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e}",
            r.time.as_f64(),
            r.energy.dirichlet.as_f64(),
            r.energy.potential.as_f64(),
            r.energy.interfacial.as_f64(),
            r.energy.total.as_f64(),
            r.rate_eta_h.as_f64(),
            r.rate_theta_h.as_f64(),
            r.rate_eta_v.as_f64(),
            r.rate_theta_v.as_f64(),
            r.s4_residual.as_f64()
        )
        ?;
    }
    Ok(())
}
