use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use kwc_core::calculus::{norm_h, Grid, ScalarField};
use kwc_core::evolution::{run, FnForcing, RunOptions, StepperKind, SystemState};
use kwc_core::model::{ModelFunctions, Parameters, ReferenceModel};
use kwc_core::Result;

use crate::report::{successive_ratios, Assertion, ExperimentReport};
use crate::table::ConvergenceTable;

/// `η = 1 + A(t) cos(πx)`, `θ = B(t) cos(πx)` on `(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ExactPair {
    /// `A ≡ a`, `B ≡ b`
    Stationary { a: f64, b: f64 },
    /// `A = a e^{-t}`, `B = b (1 + t)`
    Enveloped { a: f64, b: f64 },
}

impl ExactPair {
    /// `(A, A', B, B')` at time `t`.
    fn amplitudes(&self, t: f64) -> [f64; 4] {
        match *self {
            ExactPair::Stationary { a, b } => [a, 0.0, b, 0.0],
            ExactPair::Enveloped { a, b } => [a * (-t).exp(), -a * (-t).exp(), b * (1.0 + t), b],
        }
    }

    pub fn eta(&self, t: f64, x: f64) -> f64 {
        1.0 + self.amplitudes(t)[0] * (PI * x).cos()
    }

    pub fn theta(&self, t: f64, x: f64) -> f64 {
        self.amplitudes(t)[2] * (PI * x).cos()
    }

    /// Forcings obtained by substituting the pair into the strong equations.
    pub fn forcing(&self, model: ReferenceModel<f64>, kappa: f64, epsilon: f64) -> FnForcing<f64> {
        let p1 = *self;
        let p2 = *self;
        FnForcing::new(
            move |t, x| {
                let [a, da, b, _] = p1.amplitudes(t);
                let (c, s) = ((PI * x[0]).cos(), (PI * x[0]).sin());
                let eta = 1.0 + a * c;
                let q = -b * PI * s;
                let gamma = (epsilon * epsilon + q * q).sqrt();
                da * c + a * PI * PI * c + model.g(eta) + model.alpha_d1(eta) * gamma
            },
            move |t, x| {
                let [a, _, b, db] = p2.amplitudes(t);
                let (c, s) = ((PI * x[0]).cos(), (PI * x[0]).sin());
                let eta = 1.0 + a * c;
                let eta_x = -a * PI * s;
                let q = -b * PI * s;
                let q_x = -b * PI * PI * c;
                let gamma = (epsilon * epsilon + q * q).sqrt();
                let flux_x = model.alpha_d1(eta) * eta_x * q / gamma
                    + model.alpha(eta) * epsilon * epsilon * q_x / gamma.powi(3)
                    + kappa * q_x;
                model.alpha0(eta) * db * c - flux_x
            },
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ManufacturedConfig {
    pub kappa: f64,
    pub epsilon: f64,
    pub spatial_pair: ExactPair,
    pub spatial_cells: Vec<usize>,
    pub spatial_dt: f64,
    pub spatial_t_final: f64,
    pub temporal_pair: ExactPair,
    pub temporal_cells: usize,
    pub temporal_dts: Vec<f64>,
    pub temporal_t_final: f64,
    pub spatial_band: [f64; 2],
    pub temporal_band: [f64; 2],
}

impl Default for ManufacturedConfig {
    fn default() -> Self {
        Self {
            kappa: 0.1,
            epsilon: 0.2,
            spatial_pair: ExactPair::Stationary { a: 0.3, b: 0.5 },
            spatial_cells: vec![64, 128, 256],
            spatial_dt: 1e-3,
            spatial_t_final: 0.1,
            temporal_pair: ExactPair::Enveloped { a: 0.3, b: 0.5 },
            temporal_cells: 256,
            temporal_dts: vec![0.04, 0.02, 0.01],
            temporal_t_final: 0.4,
            spatial_band: [3.5, 4.5],
            temporal_band: [1.7, 2.3],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManufacturedReport {
    pub config: ManufacturedConfig,
    /// `sup_t |(η, θ) - (η, θ)_exact|_H` against the cell size.
    pub spatial: ConvergenceTable,
    pub spatial_ratios: Vec<f64>,
    /// Same against the time step.
    pub temporal: ConvergenceTable,
    pub temporal_ratios: Vec<f64>,
    pub assertions: Vec<Assertion>,
}

impl ExperimentReport for ManufacturedReport {
    fn name(&self) -> &'static str {
        "manufactured_convergence"
    }
    fn assertions(&self) -> &[Assertion] {
        &self.assertions
    }
    fn csv_artifacts(&self) -> Vec<(String, String)> {
        vec![("spatial.csv".into(), self.spatial.to_csv()), ("temporal.csv".into(), self.temporal.to_csv())]
    }
}

/// Sup-in-time `H` error of a run started from the exact pair.
pub fn manufactured_error(pair: &ExactPair, cells: usize, params: &Parameters<f64>) -> Result<f64> {
    let model = ReferenceModel::default();
    let grid = Grid::unit_1d(cells)?;
    let exact = |t: f64| {
        (
            ScalarField::from_fn(grid, |x| pair.eta(t, x[0])),
            ScalarField::from_fn(grid, |x| pair.theta(t, x[0])),
        )
    };
    let (eta0, theta0) = exact(0.0);
    let initial = SystemState::new(eta0, theta0, 0.0)?;
    let forcing = pair.forcing(model, params.kappa, params.epsilon);
    let traj = run(&initial, &model, params, &forcing, StepperKind::Parabolic, &RunOptions::default())
        .map_err(|f| f.error)?;
    let mut err = 0.0f64;
    for s in &traj.snapshots {
        let (e, th) = exact(s.time);
        err = err.max((norm_h(&(&s.eta - &e)).powi(2) + norm_h(&(&s.theta - &th)).powi(2)).sqrt());
    }
    Ok(err)
}

fn band_assertions(name: &str, ratios: &[f64], band: [f64; 2]) -> Assertion {
    Assertion::new(
        name,
        !ratios.is_empty() && ratios.iter().all(|&r| r >= band[0] && r <= band[1]),
        format!("ratios {ratios:?}, band {band:?}"),
    )
}

/// Error ladders under `h`-halving at small `dt` and under `dt`-halving at fine `h`.
pub fn exp_manufactured_convergence(cfg: &ManufacturedConfig) -> Result<ManufacturedReport> {
    let spatial_params = Parameters::new(cfg.kappa, cfg.epsilon, cfg.spatial_t_final).with_dt(cfg.spatial_dt);
    let spatial_err = cfg
        .spatial_cells
        .par_iter()
        .map(|&n| manufactured_error(&cfg.spatial_pair, n, &spatial_params))
        .collect::<Result<Vec<_>>>()?;
    let temporal_err = cfg
        .temporal_dts
        .par_iter()
        .map(|&dt| {
            let p = Parameters::new(cfg.kappa, cfg.epsilon, cfg.temporal_t_final).with_dt(dt);
            manufactured_error(&cfg.temporal_pair, cfg.temporal_cells, &p)
        })
        .collect::<Result<Vec<_>>>()?;
    let hs: Vec<f64> = cfg.spatial_cells.iter().map(|&n| 1.0 / n as f64).collect();
    let spatial = ConvergenceTable::new("h", hs, spatial_err, 0.0);
    let temporal = ConvergenceTable::new("dt", cfg.temporal_dts.clone(), temporal_err, 0.0);
    let spatial_ratios = successive_ratios(&spatial.errors);
    let temporal_ratios = successive_ratios(&temporal.errors);
    let assertions = vec![
        band_assertions("second order in space", &spatial_ratios, cfg.spatial_band),
        band_assertions("first order in time", &temporal_ratios, cfg.temporal_band),
    ];
    Ok(ManufacturedReport { config: cfg.clone(), spatial, spatial_ratios, temporal, temporal_ratios, assertions })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_pair_has_zero_error() {
        let pair = ExactPair::Stationary { a: 0.0, b: 0.0 };
        let params = Parameters::new(0.1, 0.2, 0.05).with_dt(0.01);
        for n in [8, 16] {
            assert!(manufactured_error(&pair, n, &params).unwrap() < 1e-12);
        }
    }

    #[test]
    fn forcing_vanishes_nowhere_it_should_not() {
        // the stationary forcing reproduces the residual of the exact pair at a point
        let pair = ExactPair::Stationary { a: 0.3, b: 0.5 };
        let m = ReferenceModel::default();
        let f = pair.forcing(m, 0.1, 0.2);
        let g = Grid::<f64>::unit_1d(4).unwrap();
        use kwc_core::evolution::Forcings;
        let u = f.u(0.0, &g);
        let x = 0.125;
        let eta = 1.0 + 0.3 * (PI * x).cos();
        let q = -0.5 * PI * (PI * x).sin();
        let expect = 0.3 * PI * PI * (PI * x).cos() + m.g(eta) + m.alpha_d1(eta) * (0.04 + q * q).sqrt();
        assert!((u.values()[0] - expect).abs() < 1e-14);
    }
}
