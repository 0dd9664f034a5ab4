use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use kwc_core::evolution::{run, write_timeseries, RunOptions, StepperKind, Trajectory, ZeroForcing};
use kwc_core::model::Parameters;
use kwc_core::Result;

use crate::report::{Assertion, ExperimentReport};
use crate::scenario::Scenario;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DissipationConfig {
    pub scenario: Scenario,
    /// Allowed per-step energy increase.
    pub energy_slack: f64,
    /// `(μ, ν)` pairs; `(0, 0)` uses the parabolic stepper.
    pub damping: Vec<[f64; 2]>,
    /// Repeat every run at `dt/2`.
    pub refine: bool,
    /// Accepted band for `worst residual(dt) / worst residual(dt/2)`.
    pub ratio_band: [f64; 2],
}

impl Default for DissipationConfig {
    fn default() -> Self {
        Self {
            scenario: Scenario::default(),
            energy_slack: 1e-9,
            damping: vec![[0.0, 0.0], [0.1, 0.1]],
            refine: true,
            ratio_band: [1.5, 2.5],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DissipationRun {
    pub label: String,
    pub mu: f64,
    pub nu: f64,
    pub dt: f64,
    pub steps: usize,
    pub energy_initial: f64,
    pub energy_final: f64,
    /// `max_n (E_{n+1} - E_n)`
    pub max_energy_increase: f64,
    /// Smallest per-step energy-inequality slack.
    pub worst_residual: f64,
    #[serde(skip)]
    pub timeseries: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DissipationReport {
    pub config: DissipationConfig,
    pub delta_alpha: f64,
    pub runs: Vec<DissipationRun>,
    /// Per damping pair: `C = max(0, -worst/dt)` fitted on the coarse run.
    pub fitted_c: Vec<f64>,
    /// Per damping pair: `|worst(dt)| / |worst(dt/2)|`.
    pub halving_ratios: Vec<f64>,
    pub assertions: Vec<Assertion>,
}

impl ExperimentReport for DissipationReport {
    fn name(&self) -> &'static str {
        "energy_dissipation"
    }
    fn assertions(&self) -> &[Assertion] {
        &self.assertions
    }
    fn csv_artifacts(&self) -> Vec<(String, String)> {
        self.runs.iter().map(|r| (format!("timeseries_{}.csv", r.label), r.timeseries.clone())).collect()
    }
}

fn summarize(label: String, params: &Parameters<f64>, traj: &Trajectory<f64>) -> Result<DissipationRun> {
    let e: Vec<f64> = traj.energies().collect();
    let max_inc = e.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
    let worst = traj.records[1..].iter().map(|r| r.s4_residual).fold(f64::INFINITY, f64::min);
    let mut buf = Vec::new();
    write_timeseries(&traj.records, &mut buf)?;
    Ok(DissipationRun {
        label,
        mu: params.mu,
        nu: params.nu,
        dt: params.dt,
        steps: traj.records.len() - 1,
        energy_initial: e[0],
        energy_final: e[e.len() - 1],
        max_energy_increase: max_inc,
        worst_residual: worst,
        timeseries: String::from_utf8(buf).expect("ascii csv"),
    })
}

/// Unforced runs checking monotone energy decay and the discrete energy
/// inequality, with a `dt`-halving study of the worst slack.
pub fn exp_energy_dissipation(cfg: &DissipationConfig) -> Result<DissipationReport> {
    let sc = &cfg.scenario;
    let model = sc.model()?;
    let initial = sc.initial_state(sc.epsilon)?;
    let delta_alpha = crate::sampled_bounds(&model)?.delta_alpha;
    let base = sc.params();
    base.validate()?;

    let mut jobs = Vec::new();
    for &[mu, nu] in &cfg.damping {
        let levels: &[f64] = if cfg.refine { &[1.0, 0.5] } else { &[1.0] };
        for &f in levels {
            let p = base.with_damping(mu, nu).with_dt(base.dt * f);
            let kind = if p.is_parabolic() { StepperKind::Parabolic } else { StepperKind::PseudoParabolic };
            let tag = if p.is_parabolic() { "parabolic".to_string() } else { format!("mu{mu}_nu{nu}") };
            let label = if f == 1.0 { tag } else { format!("{tag}_half_dt") };
            jobs.push((label, p, kind));
        }
    }
    let opts = RunOptions { snapshot_stride: usize::MAX, delta_alpha: Some(delta_alpha), ..RunOptions::default() };
    let runs: Vec<DissipationRun> = jobs
        .par_iter()
        .map(|(label, p, kind)| {
            let traj = run(&initial, &model, p, &ZeroForcing, *kind, &opts).map_err(|f| f.error)?;
            summarize(label.clone(), p, &traj)
        })
        .collect::<Result<_>>()?;

    let mut assertions = Vec::new();
    let mut fitted_c = Vec::new();
    let mut halving_ratios = Vec::new();
    for r in &runs {
        assertions.push(Assertion::new(
            format!("{}: energy nonincreasing", r.label),
            r.max_energy_increase <= cfg.energy_slack,
            format!("max step increase {:e} (slack {:e})", r.max_energy_increase, cfg.energy_slack),
        ));
    }
    let per_pair = if cfg.refine { 2 } else { 1 };
    for pair in runs.chunks(per_pair) {
        let coarse = &pair[0];
        let c = (-coarse.worst_residual / coarse.dt).max(0.0);
        fitted_c.push(c);
        for r in pair {
            let floor = -c * r.dt - 1e-12;
            assertions.push(Assertion::new(
                format!("{}: energy inequality residual >= -C dt", r.label),
                r.worst_residual >= floor,
                format!("worst {:e}, C = {c:e}, bound {floor:e}", r.worst_residual),
            ));
        }
        if let [a, b] = pair {
            let ratio = a.worst_residual.abs() / b.worst_residual.abs();
            halving_ratios.push(ratio);
            assertions.push(Assertion::new(
                format!("{}: worst residual halves with dt", a.label),
                ratio >= cfg.ratio_band[0] && ratio <= cfg.ratio_band[1],
                format!("ratio {ratio:.4} (band {:?})", cfg.ratio_band),
            ));
        }
    }
    Ok(DissipationReport { config: cfg.clone(), delta_alpha, runs, fitted_c, halving_ratios, assertions })
}
