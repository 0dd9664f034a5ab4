use serde::{Deserialize, Serialize};

use kwc_core::calculus::{Grid, ScalarField};
use kwc_core::evolution::{prepare_initial_theta, InitialProfile, SystemState};
use kwc_core::model::{ModelSpec, Parameters, ReferenceModel};
use kwc_core::Result;

/// Grid, parameters, model and initial data shared by the trajectory experiments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Scenario {
    pub dim: usize,
    pub cells: usize,
    pub extent: f64,
    pub kappa: f64,
    pub epsilon: f64,
    #[serde(rename = "T")]
    pub t_final: f64,
    /// Defaults to `1e-3 T`.
    pub dt: Option<f64>,
    pub model: ModelSpec,
    pub eta0: InitialProfile,
    pub theta0: InitialProfile,
    /// Replace `θ₀` by its resolvent image before running.
    pub prepare_theta: bool,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            dim: 1,
            cells: 64,
            extent: 1.0,
            kappa: 0.1,
            epsilon: 0.1,
            t_final: 1.0,
            dt: None,
            model: ModelSpec::default(),
            eta0: InitialProfile::RandomSmooth { mean: 0.8, amplitude: 0.6, max_mode: 4, seed: 1 },
            theta0: InitialProfile::Tanh { axis: 0, center: 0.5, width: 0.1, low: 0.0, high: 1.0 },
            prepare_theta: true,
        }
    }
}

fn reseed(p: &mut InitialProfile, seed: u64) {
    if let InitialProfile::RandomSmooth { seed: s, .. } = p {
        *s = seed;
    }
}

impl Scenario {
    /// Overrides the seed of every random profile; `eta0` gets `seed`, `theta0` gets `seed + 1`.
    pub fn reseeded(mut self, seed: u64) -> Self {
        reseed(&mut self.eta0, seed);
        reseed(&mut self.theta0, seed.wrapping_add(1));
        self
    }

    pub fn grid(&self) -> Result<Grid<f64>> {
        let d = self.dim.clamp(1, 2);
        Grid::new(self.dim, &[self.cells; 2][..d], &[self.extent; 2][..d])
    }

    pub fn params(&self) -> Parameters<f64> {
        let p = Parameters::new(self.kappa, self.epsilon, self.t_final);
        match self.dt {
            Some(dt) => p.with_dt(dt),
            None => p,
        }
    }

    pub fn model(&self) -> Result<ReferenceModel<f64>> {
        self.model.build()
    }

    /// Raw profiles sampled on the grid.
    pub fn raw_fields(&self) -> Result<(ScalarField<f64>, ScalarField<f64>)> {
        let g = self.grid()?;
        Ok((self.eta0.sample(&g)?, self.theta0.sample(&g)?))
    }

    /// Initial state with `θ₀` prepared at regularization `epsilon`.
    pub fn initial_state(&self, epsilon: f64) -> Result<SystemState<f64>> {
        let (eta, theta) = self.raw_fields()?;
        let theta = if self.prepare_theta {
            let w = ScalarField::zeros(*eta.grid());
            prepare_initial_theta(&eta, &theta, &w, epsilon, self.kappa, &self.model()?)?
        } else {
            theta
        };
        SystemState::new(eta, theta, 0.0)
    }
}
