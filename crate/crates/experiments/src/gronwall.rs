use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use kwc_core::calculus::{norm_h, ScalarField};
use kwc_core::evolution::{run, RunOptions, StepperKind, SystemState, Trajectory, ZeroForcing};
use kwc_core::model::{ModelFunctions, ReferenceModel};
use kwc_core::Result;

use crate::embedding::{estimate_embedding_constant, EmbeddingEstimate};
use crate::report::{csv, Assertion, ExperimentReport};
use crate::scenario::Scenario;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Perturbed {
    Eta,
    Theta,
    Both,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ContinuousDependenceConfig {
    pub scenario: Scenario,
    /// Amplitude of the `cos(πx₁)` perturbation of the initial data.
    pub delta: f64,
    pub perturb: Perturbed,
    /// Allowed excess over the Gronwall envelope.
    pub envelope_margin: f64,
    /// Allowed relative deviation of `√sup J(δ) / √sup J(δ/2)` from 2.
    pub linearity_tolerance: f64,
    pub embedding_samples: usize,
    pub seed: u64,
}

impl Default for ContinuousDependenceConfig {
    fn default() -> Self {
        Self {
            scenario: Scenario::default(),
            delta: 1e-3,
            perturb: Perturbed::Eta,
            envelope_margin: 0.1,
            linearity_tolerance: 0.2,
            embedding_samples: 2000,
            seed: 0,
        }
    }
}

/// Discrete Gronwall check for one pair of runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GronwallReport {
    pub delta: f64,
    pub times: Vec<f64>,
    /// `|η¹-η²|² + |√α₀(η¹)(θ¹-θ²)|²`
    #[serde(rename = "J")]
    pub j: Vec<f64>,
    /// `|∂_t η¹|²_V + |∂_t θ²|²_V + 1`
    #[serde(rename = "R")]
    pub r: Vec<f64>,
    /// `J(0) exp(2 C_hat ∫R)`
    pub envelope: Vec<f64>,
    #[serde(rename = "C1_formula")]
    pub c1_formula: f64,
    /// Smallest `C` with `J_{n+1} - J_n ≤ 2 C dt R_{n+1} J_n` on every step.
    #[serde(rename = "C_hat")]
    pub c_hat: f64,
    pub pass: bool,
}

impl GronwallReport {
    pub fn sup_j(&self) -> f64 {
        self.j.iter().cloned().fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuousDependenceReport {
    pub config: ContinuousDependenceConfig,
    pub embedding: EmbeddingEstimate,
    pub full: GronwallReport,
    pub half: GronwallReport,
    /// `δ = 0`: `J` must vanish identically.
    pub zero_perturbation_sup_j: f64,
    pub linearity_ratio: f64,
    pub assertions: Vec<Assertion>,
}

impl ExperimentReport for ContinuousDependenceReport {
    fn name(&self) -> &'static str {
        "continuous_dependence"
    }
    fn assertions(&self) -> &[Assertion] {
        &self.assertions
    }
    fn csv_artifacts(&self) -> Vec<(String, String)> {
        [("gronwall.csv", &self.full), ("gronwall_half_delta.csv", &self.half)]
            .into_iter()
            .map(|(f, g)| {
                let rows = (0..g.times.len()).map(|i| vec![g.times[i], g.j[i], g.r[i], g.envelope[i]]);
                (f.to_string(), csv("t,J,R,envelope", rows))
            })
            .collect()
    }
}

/// `4/((κ∧1)(δ_α∧1)) (|g'|∞ + |α'|²∞ + C⁴|α₀'|²∞ + κ)`.
pub fn c1_formula(kappa: f64, bounds: &kwc_core::model::ModelBounds<f64>, c_v_l4: f64) -> f64 {
    4.0 / (kappa.min(1.0) * bounds.delta_alpha.min(1.0))
        * (bounds.g_d1_sup + bounds.alpha_d1_sup.powi(2) + c_v_l4.powi(4) * bounds.alpha0_d1_sup.powi(2) + kappa)
}

/// Assembles `J`, `R`, the fitted constant and the envelope check for two
/// trajectories sampled at every step.
pub fn gronwall_analysis<M: ModelFunctions<f64> + ?Sized>(
    a: &Trajectory<f64>,
    b: &Trajectory<f64>,
    model: &M,
    dt: f64,
    margin: f64,
    c1: f64,
    delta: f64,
) -> GronwallReport {
    let n = a.snapshots.len().min(b.snapshots.len());
    let mut times = Vec::with_capacity(n);
    let mut j = Vec::with_capacity(n);
    let mut r = Vec::with_capacity(n);
    for k in 0..n {
        let (x, y) = (&a.snapshots[k], &b.snapshots[k]);
        let de = &x.eta - &y.eta;
        let w: Vec<f64> = x.eta.values().iter().map(|&e| model.alpha0(e).sqrt()).collect();
        let dth = (&x.theta - &y.theta).values().iter().zip(&w).map(|(d, s)| d * s).collect::<Vec<_>>();
        let dth = ScalarField::from_values(*x.eta.grid(), dth).expect("finite difference");
        times.push(x.time);
        j.push(norm_h(&de).powi(2) + norm_h(&dth).powi(2));
        r.push(a.records[k].rate_eta_v.powi(2) + b.records[k].rate_theta_v.powi(2) + 1.0);
    }
    let mut c_hat = 0.0f64;
    for k in 0..n.saturating_sub(1) {
        if j[k] > 0.0 {
            c_hat = c_hat.max((j[k + 1] - j[k]) / (2.0 * dt * r[k + 1] * j[k]));
        } else if j[k + 1] > 0.0 {
            c_hat = f64::INFINITY;
        }
    }
    let mut integral = 0.0;
    let mut envelope = Vec::with_capacity(n);
    for k in 0..n {
        if k > 0 {
            integral += dt * r[k];
        }
        envelope.push(j[0] * (2.0 * c_hat * integral).exp());
    }
    let pass = c_hat.is_finite() && j.iter().zip(&envelope).all(|(&jj, &e)| jj <= e * (1.0 + margin));
    GronwallReport { delta, times, j, r, envelope, c1_formula: c1, c_hat, pass }
}

fn perturbed(base: &SystemState<f64>, delta: f64, which: Perturbed) -> SystemState<f64> {
    let g = *base.eta.grid();
    let ext = g.extents()[0];
    let bump = ScalarField::from_fn(g, |x| delta * (std::f64::consts::PI * x[0] / ext).cos());
    let mut s = base.clone();
    if matches!(which, Perturbed::Eta | Perturbed::Both) {
        s.eta = &s.eta + &bump;
    }
    if matches!(which, Perturbed::Theta | Perturbed::Both) {
        s.theta = &s.theta + &bump;
    }
    s
}

/// Two runs from initial data `δ` apart (and a repeat at `δ/2`), checked
/// against the discrete Gronwall envelope.
pub fn exp_continuous_dependence(cfg: &ContinuousDependenceConfig) -> Result<ContinuousDependenceReport> {
    let sc = &cfg.scenario;
    let model: ReferenceModel<f64> = sc.model()?;
    let params = sc.params();
    let base = sc.initial_state(sc.epsilon)?;
    let bounds = crate::sampled_bounds(&model)?;
    let embedding = estimate_embedding_constant(&sc.grid()?, cfg.embedding_samples, cfg.seed)?;
    let c1 = c1_formula(params.kappa, &bounds, embedding.c_v_l4);

    let opts = RunOptions { snapshot_stride: 1, delta_alpha: Some(bounds.delta_alpha), ..RunOptions::default() };
    let starts = [
        base.clone(),
        perturbed(&base, cfg.delta, cfg.perturb),
        perturbed(&base, 0.5 * cfg.delta, cfg.perturb),
        perturbed(&base, 0.0, cfg.perturb),
    ];
    let runs: Vec<Trajectory<f64>> = starts
        .par_iter()
        .map(|s| run(s, &model, &params, &ZeroForcing, StepperKind::Parabolic, &opts).map_err(|f| f.error))
        .collect::<Result<_>>()?;
    let margin = cfg.envelope_margin;
    let full = gronwall_analysis(&runs[0], &runs[1], &model, params.dt, margin, c1, cfg.delta);
    let half = gronwall_analysis(&runs[0], &runs[2], &model, params.dt, margin, c1, 0.5 * cfg.delta);
    let zero = gronwall_analysis(&runs[0], &runs[3], &model, params.dt, margin, c1, 0.0);
    let zero_sup = zero.sup_j();
    let linearity_ratio = (full.sup_j() / half.sup_j()).sqrt();
    let assertions = vec![
        Assertion::new(
            "J stays below the Gronwall envelope",
            full.pass && half.pass,
            format!("C_hat = {:e} (delta), {:e} (delta/2); C1_formula = {c1:e}", full.c_hat, half.c_hat),
        ),
        Assertion::new(
            "sqrt(sup J) is linear in delta",
            (linearity_ratio / 2.0 - 1.0).abs() <= cfg.linearity_tolerance,
            format!("ratio {linearity_ratio:.4}, expected 2 within {}", cfg.linearity_tolerance),
        ),
        Assertion::new("delta = 0 gives J = 0", zero_sup == 0.0, format!("sup J = {zero_sup:e}")),
    ];
    Ok(ContinuousDependenceReport {
        config: cfg.clone(),
        embedding,
        full,
        half,
        zero_perturbation_sup_j: zero_sup,
        linearity_ratio,
        assertions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_runs_have_zero_distance() {
        let sc = Scenario { t_final: 0.02, dt: Some(1e-3), ..Scenario::default() };
        let model = sc.model().unwrap();
        let params = sc.params();
        let init = sc.initial_state(sc.epsilon).unwrap();
        let traj = run(&init, &model, &params, &ZeroForcing, StepperKind::Parabolic, &RunOptions::default()).unwrap();
        let rep = gronwall_analysis(&traj, &traj, &model, params.dt, 0.1, 1.0, 0.0);
        assert_eq!(rep.sup_j(), 0.0);
        assert_eq!(rep.c_hat, 0.0);
        assert!(rep.pass);
        assert!(rep.r.iter().all(|&r| r >= 1.0));
    }

    #[test]
    fn c1_formula_reference_value() {
        let bounds = kwc_core::model::ModelBounds {
            g_d1_sup: 1.0,
            alpha_d1_sup: 1.0,
            alpha_d2_sup: 10.0,
            alpha0_sup: 2.0,
            alpha0_d1_sup: 0.5,
            delta_alpha: 0.5,
            range: (-1.0, 1.0),
            samples: 3,
        };
        // 4 / (0.1 * 0.5) * (1 + 1 + 16 * 0.25 + 0.1)
        assert!((c1_formula(0.1, &bounds, 2.0) - 488.0).abs() < 1e-9);
    }
}
