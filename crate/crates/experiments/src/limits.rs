use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use kwc_core::evolution::{run, RunOptions, StepperKind, Trajectory, ZeroForcing};
use kwc_core::Result;

use crate::distance::{identical, sup_distances, v_distance};
use crate::report::{strictly_decreasing, Assertion, ExperimentReport};
use crate::scenario::Scenario;
use crate::table::ConvergenceTable;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EpsilonLimitConfig {
    /// The scenario's own `epsilon` is ignored.
    pub scenario: Scenario,
    pub epsilons: Vec<f64>,
    pub epsilon0: f64,
    pub snapshot_stride: usize,
}

impl Default for EpsilonLimitConfig {
    fn default() -> Self {
        Self {
            scenario: Scenario::default(),
            epsilons: vec![0.5, 0.3, 0.2, 0.15, 0.11],
            epsilon0: 0.1,
            snapshot_stride: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsilonLimitReport {
    pub config: EpsilonLimitConfig,
    /// `|θ_{0,ε} - θ_{0,ε₀}|_V`
    pub initial_data: ConvergenceTable,
    /// `sup_t |(η, θ)_ε - (η, θ)_{ε₀}|_H`
    pub trajectory_h: ConvergenceTable,
    /// Same in `V`; reported only.
    pub trajectory_v: ConvergenceTable,
    pub assertions: Vec<Assertion>,
}

impl ExperimentReport for EpsilonLimitReport {
    fn name(&self) -> &'static str {
        "epsilon_limit"
    }
    fn assertions(&self) -> &[Assertion] {
        &self.assertions
    }
    fn csv_artifacts(&self) -> Vec<(String, String)> {
        vec![
            ("initial_data_v.csv".into(), self.initial_data.to_csv()),
            ("trajectory_sup_h.csv".into(), self.trajectory_h.to_csv()),
            ("trajectory_sup_v.csv".into(), self.trajectory_v.to_csv()),
        ]
    }
}

fn decreasing(name: &str, t: &ConvergenceTable) -> Assertion {
    Assertion::new(name, strictly_decreasing(&t.errors), format!("{:?}", t.errors))
}

/// Runs at each `ε_n` (with prepared data at the same `ε_n`) compared with the
/// run at `ε₀`.
pub fn exp_epsilon_limit(cfg: &EpsilonLimitConfig) -> Result<EpsilonLimitReport> {
    let sc = &cfg.scenario;
    let model = sc.model()?;
    let opts = RunOptions { snapshot_stride: cfg.snapshot_stride.max(1), ..RunOptions::default() };
    let mut all = vec![cfg.epsilon0];
    all.extend(&cfg.epsilons);
    let runs: Vec<(kwc_core::calculus::ScalarField<f64>, Trajectory<f64>)> = all
        .par_iter()
        .map(|&eps| {
            let initial = sc.initial_state(eps)?;
            let mut params = sc.params();
            params.epsilon = eps;
            let traj = run(&initial, &model, &params, &ZeroForcing, StepperKind::Parabolic, &opts).map_err(|f| f.error)?;
            Ok((initial.theta, traj))
        })
        .collect::<Result<_>>()?;
    let (theta_ref, traj_ref) = &runs[0];
    let mut init_err = Vec::new();
    let mut h_err = Vec::new();
    let mut v_err = Vec::new();
    for (theta, traj) in &runs[1..] {
        init_err.push(v_distance(theta, theta_ref));
        let (h, v) = sup_distances(traj, traj_ref);
        h_err.push(h);
        v_err.push(v);
    }
    let eps = cfg.epsilons.clone();
    let initial_data = ConvergenceTable::new("epsilon", eps.clone(), init_err, cfg.epsilon0);
    let trajectory_h = ConvergenceTable::new("epsilon", eps.clone(), h_err, cfg.epsilon0);
    let trajectory_v = ConvergenceTable::new("epsilon", eps, v_err, cfg.epsilon0);
    let assertions = vec![
        decreasing("prepared initial data converge in V", &initial_data),
        decreasing("trajectories converge in sup-H", &trajectory_h),
    ];
    Ok(EpsilonLimitReport { config: cfg.clone(), initial_data, trajectory_h, trajectory_v, assertions })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MuNuLimitConfig {
    pub scenario: Scenario,
    /// Common values of `μ = ν`.
    pub damping: Vec<f64>,
    pub snapshot_stride: usize,
}

impl Default for MuNuLimitConfig {
    fn default() -> Self {
        Self { scenario: Scenario::default(), damping: vec![0.2, 0.1, 0.05, 0.025], snapshot_stride: 10 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MuNuLimitReport {
    pub config: MuNuLimitConfig,
    pub trajectory_h: ConvergenceTable,
    pub trajectory_v: ConvergenceTable,
    /// Undamped pseudo-parabolic run equals the parabolic run bit for bit.
    pub undamped_identical: bool,
    pub assertions: Vec<Assertion>,
}

impl ExperimentReport for MuNuLimitReport {
    fn name(&self) -> &'static str {
        "munu_limit"
    }
    fn assertions(&self) -> &[Assertion] {
        &self.assertions
    }
    fn csv_artifacts(&self) -> Vec<(String, String)> {
        vec![
            ("trajectory_sup_h.csv".into(), self.trajectory_h.to_csv()),
            ("trajectory_sup_v.csv".into(), self.trajectory_v.to_csv()),
        ]
    }
}

/// Pseudo-parabolic runs with `μ = ν ↓ 0` compared with the parabolic run.
pub fn exp_munu_limit(cfg: &MuNuLimitConfig) -> Result<MuNuLimitReport> {
    let sc = &cfg.scenario;
    let model = sc.model()?;
    let initial = sc.initial_state(sc.epsilon)?;
    let base = sc.params();
    let opts = RunOptions { snapshot_stride: cfg.snapshot_stride.max(1), ..RunOptions::default() };
    let mut jobs = vec![(0.0, StepperKind::Parabolic), (0.0, StepperKind::PseudoParabolic)];
    jobs.extend(cfg.damping.iter().map(|&m| (m, StepperKind::PseudoParabolic)));
    let runs: Vec<Trajectory<f64>> = jobs
        .par_iter()
        .map(|&(m, kind)| {
            run(&initial, &model, &base.with_damping(m, m), &ZeroForcing, kind, &opts).map_err(|f| f.error)
        })
        .collect::<Result<_>>()?;
    let undamped_identical = identical(&runs[0], &runs[1]);
    let (h, v): (Vec<f64>, Vec<f64>) = runs[2..].iter().map(|t| sup_distances(t, &runs[0])).unzip();
    let trajectory_h = ConvergenceTable::new("mu_nu", cfg.damping.clone(), h, 0.0);
    let trajectory_v = ConvergenceTable::new("mu_nu", cfg.damping.clone(), v, 0.0);
    let assertions = vec![
        decreasing("damped trajectories converge in sup-H", &trajectory_h),
        Assertion::new("mu = nu = 0 reproduces the parabolic run", undamped_identical, ""),
    ];
    Ok(MuNuLimitReport { config: cfg.clone(), trajectory_h, trajectory_v, undamped_identical, assertions })
}
