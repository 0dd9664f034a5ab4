use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use kwc_core::calculus::{laplacian_neumann, norm_h, norm_h2, norm_v, Grid, ScalarField};
use kwc_core::elliptic::{check_h2_bound, singular_resolvent, SingularResolventProblem};
use kwc_core::evolution::{run, RunOptions, StepperKind, Trajectory, ZeroForcing};
use kwc_core::model::ModelFunctions;
use kwc_core::Result;

use crate::report::{csv, Assertion, ExperimentReport};
use crate::scenario::Scenario;

/// Named `(β, z)` pair of the battery; `z` is scaled by the configured amplitude.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BatteryEntry {
    /// `β ≡ 0`, `z ≡ 2`
    Constant,
    /// `β = 1 + ½cos(πx)`, `z = A cos(πx)`
    CosineWeight,
    /// `β = ½ + x²`, `z = A tanh((x - ½)/0.1)`
    SmoothStep,
    /// `β = α(1 + ½cos(2πx))`, `z = A(cos(2πx) + ½cos(3πx))`
    ReferenceWeight,
}

impl BatteryEntry {
    pub const ALL: [BatteryEntry; 4] =
        [BatteryEntry::Constant, BatteryEntry::CosineWeight, BatteryEntry::SmoothStep, BatteryEntry::ReferenceWeight];

    pub fn fields(self, grid: &Grid<f64>, amplitude: f64) -> (ScalarField<f64>, ScalarField<f64>) {
        use std::f64::consts::PI;
        let l = grid.extents()[0];
        let f = |h: &dyn Fn(f64) -> f64| ScalarField::from_fn(*grid, |x| h(x[0] / l));
        match self {
            BatteryEntry::Constant => (f(&|_| 0.0), f(&|_| 2.0)),
            BatteryEntry::CosineWeight => (f(&|x| 1.0 + 0.5 * (PI * x).cos()), f(&|x| amplitude * (PI * x).cos())),
            BatteryEntry::SmoothStep => (f(&|x| 0.5 + x * x), f(&|x| amplitude * ((x - 0.5) / 0.1).tanh())),
            BatteryEntry::ReferenceWeight => {
                let m = kwc_core::model::ReferenceModel::<f64>::default();
                (
                    f(&|x| m.alpha(1.0 + 0.5 * (2.0 * PI * x).cos())),
                    f(&|x| amplitude * ((2.0 * PI * x).cos() + 0.5 * (3.0 * PI * x).cos())),
                )
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct H2UniformityConfig {
    pub cells: usize,
    pub kappa: f64,
    pub battery: Vec<BatteryEntry>,
    /// Scale of `z`. When `z` is small against `β` the singular term flattens
    /// the solution towards the mean of `z` as `ε ↓ 0` and the ratio decays.
    pub z_amplitude: f64,
    /// `ε = 2^{-k}` for `k` in `0..=max_halvings`.
    pub max_halvings: u32,
    pub max_ratio_spread: f64,
    /// Trajectory part: scenario run at `dt` and `dt/2`.
    pub scenario: Scenario,
    pub trajectory_tolerance: f64,
}

impl Default for H2UniformityConfig {
    fn default() -> Self {
        Self {
            cells: 128,
            kappa: 0.1,
            battery: BatteryEntry::ALL.to_vec(),
            z_amplitude: 20.0,
            max_halvings: 8,
            max_ratio_spread: 2.0,
            scenario: Scenario { t_final: 0.25, ..Scenario::default() },
            trajectory_tolerance: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatteryResult {
    pub entry: BatteryEntry,
    pub epsilons: Vec<f64>,
    pub ratios: Vec<f64>,
    pub spread: f64,
}

/// `ν²|Δθ(t)|² + (κ/2)∫|Δθ|² ≤ C (|η|²_{V_t} + |θ|²_{H_t} + |∂_tθ|²_{H_t} + |v|²_{H_t} + t)`
/// along a trajectory, with `C` fitted on the coarse run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryH2 {
    pub dt: f64,
    pub times: Vec<f64>,
    pub lhs: Vec<f64>,
    pub rhs: Vec<f64>,
    pub sup_norm_h2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct H2UniformityReport {
    pub config: H2UniformityConfig,
    pub battery: Vec<BatteryResult>,
    pub coarse: TrajectoryH2,
    pub fine: TrajectoryH2,
    pub fitted_constant: f64,
    pub assertions: Vec<Assertion>,
}

impl ExperimentReport for H2UniformityReport {
    fn name(&self) -> &'static str {
        "h2_uniformity"
    }
    fn assertions(&self) -> &[Assertion] {
        &self.assertions
    }
    fn csv_artifacts(&self) -> Vec<(String, String)> {
        let mut header = String::from("epsilon");
        for b in &self.battery {
            header.push_str(&format!(",{}", serde_json::to_value(b.entry).unwrap().as_str().unwrap_or("entry")));
        }
        let rows = (0..self.battery.first().map_or(0, |b| b.epsilons.len())).map(|i| {
            let mut row = vec![self.battery[0].epsilons[i]];
            row.extend(self.battery.iter().map(|b| b.ratios[i]));
            row
        });
        let traj = |t: &TrajectoryH2| csv("t,lhs,rhs", (0..t.times.len()).map(|i| vec![t.times[i], t.lhs[i], t.rhs[i]]));
        vec![
            ("battery_ratios.csv".into(), csv(&header, rows)),
            ("trajectory_h2_dt.csv".into(), traj(&self.coarse)),
            ("trajectory_h2_half_dt.csv".into(), traj(&self.fine)),
        ]
    }
}

/// `check_h2_bound` across `ε` for one battery entry.
pub fn battery_ratios(
    entry: BatteryEntry,
    grid: &Grid<f64>,
    amplitude: f64,
    kappa: f64,
    epsilons: &[f64],
) -> Result<BatteryResult> {
    let (beta, z) = entry.fields(grid, amplitude);
    let ratios = epsilons
        .iter()
        .map(|&eps| {
            let p = SingularResolventProblem::unit_weight(beta.clone(), kappa, z.clone(), eps);
            let (w, _) = singular_resolvent(&p)?;
            Ok(check_h2_bound(&w, &z, &beta))
        })
        .collect::<Result<Vec<f64>>>()?;
    let hi = ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(BatteryResult { entry, epsilons: epsilons.to_vec(), ratios, spread: hi / lo })
}

fn trajectory_h2(traj: &Trajectory<f64>, dt: f64, kappa: f64, nu: f64) -> TrajectoryH2 {
    let mut times = Vec::new();
    let mut lhs = Vec::new();
    let mut rhs = Vec::new();
    let mut int_lap = 0.0;
    let mut int_rhs = 0.0;
    let mut sup = 0.0f64;
    for (k, (s, rec)) in traj.snapshots.iter().zip(&traj.records).enumerate() {
        let lap = norm_h(&laplacian_neumann(&s.theta)).powi(2);
        sup = sup.max(norm_h2(&s.theta));
        if k > 0 {
            int_lap += dt * lap;
            int_rhs += dt * (norm_v(&s.eta).powi(2) + norm_h(&s.theta).powi(2) + rec.rate_theta_h.powi(2) + rec.v_norm_sq);
        }
        times.push(s.time);
        lhs.push(nu * nu * lap + 0.5 * kappa * int_lap);
        rhs.push(int_rhs + s.time);
    }
    TrajectoryH2 { dt, times, lhs, rhs, sup_norm_h2: sup }
}

/// `ε`-uniformity of the resolvent `H²` bound, and boundedness of `|θ|_{H²}`
/// along a trajectory under `dt` refinement.
pub fn exp_h2_uniformity(cfg: &H2UniformityConfig) -> Result<H2UniformityReport> {
    let grid = Grid::unit_1d(cfg.cells)?;
    let epsilons: Vec<f64> = (0..=cfg.max_halvings).map(|k| 2f64.powi(-(k as i32))).collect();
    let battery = cfg
        .battery
        .par_iter()
        .map(|&e| battery_ratios(e, &grid, cfg.z_amplitude, cfg.kappa, &epsilons))
        .collect::<Result<Vec<_>>>()?;

    let sc = &cfg.scenario;
    let model = sc.model()?;
    let initial = sc.initial_state(sc.epsilon)?;
    let params = sc.params();
    let opts = RunOptions { snapshot_stride: 1, ..RunOptions::default() };
    let runs: Vec<TrajectoryH2> = [1.0, 0.5]
        .par_iter()
        .map(|&f| {
            let p = params.with_dt(params.dt * f);
            let traj = run(&initial, &model, &p, &ZeroForcing, StepperKind::Parabolic, &opts).map_err(|e| e.error)?;
            Ok(trajectory_h2(&traj, p.dt, p.kappa, p.nu))
        })
        .collect::<Result<_>>()?;
    let (coarse, fine) = (runs[0].clone(), runs[1].clone());
    let fitted_constant =
        coarse.lhs.iter().zip(&coarse.rhs).filter(|(_, &r)| r > 0.0).map(|(l, r)| l / r).fold(0.0, f64::max);
    let fine_ok = fine
        .lhs
        .iter()
        .zip(&fine.rhs)
        .all(|(&l, &r)| l <= fitted_constant * r * (1.0 + cfg.trajectory_tolerance) + 1e-12);
    let sup_change = (fine.sup_norm_h2 / coarse.sup_norm_h2 - 1.0).abs();

    let mut assertions: Vec<Assertion> = battery
        .iter()
        .map(|b| {
            Assertion::new(
                format!("{:?}: H2 ratio uniform in epsilon", b.entry),
                b.spread <= cfg.max_ratio_spread,
                format!("max/min = {:.4}", b.spread),
            )
        })
        .collect();
    assertions.push(Assertion::new(
        "trajectory H2 estimate holds at dt/2 with the constant fitted at dt",
        fitted_constant.is_finite() && fine_ok,
        format!("C = {fitted_constant:e}"),
    ));
    assertions.push(Assertion::new(
        "sup |theta|_H2 stable under dt halving",
        sup_change <= cfg.trajectory_tolerance,
        format!("{:e} vs {:e}", coarse.sup_norm_h2, fine.sup_norm_h2),
    ));
    Ok(H2UniformityReport { config: cfg.clone(), battery, coarse, fine, fitted_constant, assertions })
}
