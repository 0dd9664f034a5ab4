use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::calculus::snapshot::read_snapshot;
use crate::calculus::{div, grad, laplacian_neumann, Grid, ScalarField};
use crate::elliptic::{linear_resolvent, singular_resolvent, LinearResolventProblem, SingularResolventProblem};
use crate::error::{Error, Result};
use crate::evolution::forcing::Forcings;
use crate::evolution::state::SystemState;
use crate::model::{gamma_cell, singular_flux, ModelFunctions, Parameters};
use crate::scalar::Real;

/// One term `a cos(kx π x / Lx) cos(ky π y / Ly)` of a cosine series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CosineMode {
    pub k: [u32; 2],
    pub amplitude: f64,
}

/// Initial profile of one unknown.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialProfile {
    Constant {
        value: f64,
    },
    Cosine {
        #[serde(default)]
        mean: f64,
        modes: Vec<CosineMode>,
    },
    /// Random cosine series with coefficients decaying like `1/(1+|k|²)`.
    RandomSmooth {
        #[serde(default)]
        mean: f64,
        amplitude: f64,
        max_mode: u32,
        seed: u64,
    },
    /// `low + (high-low)(1 + tanh((x_axis - center)/width))/2`.
    Tanh {
        #[serde(default)]
        axis: usize,
        center: f64,
        width: f64,
        low: f64,
        high: f64,
    },
    /// Snapshot CSV on the same grid.
    File {
        path: PathBuf,
    },
}

impl InitialProfile {
    pub fn sample<T: Real + FromStr>(&self, grid: &Grid<T>) -> Result<ScalarField<T>> {
        let ext = grid.extents();
        let phase = |k: [u32; 2], x: [T; 2]| -> f64 {
            let mut c = 1.0;
            for a in 0..grid.dim() {
                c *= (k[a] as f64 * std::f64::consts::PI * x[a].as_f64() / ext[a].as_f64()).cos();
            }
            c
        };
        match self {
            InitialProfile::Constant { value } => Ok(ScalarField::constant(*grid, T::lit(*value))),
            InitialProfile::Cosine { mean, modes } => Ok(ScalarField::from_fn(*grid, |x| {
                T::lit(mean + modes.iter().map(|m| m.amplitude * phase(m.k, x)).sum::<f64>())
            })),
            InitialProfile::RandomSmooth { mean, amplitude, max_mode, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let ky_max = if grid.dim() == 2 { *max_mode } else { 0 };
                let mut modes = Vec::new();
                for kx in 0..=*max_mode {
                    for ky in 0..=ky_max {
                        if kx == 0 && ky == 0 {
                            continue;
                        }
                        let decay = 1.0 / (1.0 + (kx * kx + ky * ky) as f64);
                        modes.push(CosineMode { k: [kx, ky], amplitude: amplitude * decay * rng.gen_range(-1.0..1.0) });
                    }
                }
                InitialProfile::Cosine { mean: *mean, modes }.sample(grid)
            }
            InitialProfile::Tanh { axis, center, width, low, high } => {
                if *axis >= grid.dim() || !(*width > 0.0) {
                    return Err(Error::InvalidArgument("tanh profile needs axis < dim and width > 0".into()));
                }
                Ok(ScalarField::from_fn(*grid, |x| {
                    let s = ((x[*axis].as_f64() - center) / width).tanh();
                    T::lit(low + (high - low) * 0.5 * (1.0 + s))
                }))
            }
            InitialProfile::File { path } => {
                let f = File::open(path)
                    .map_err(|e| Error::InvalidArgument(format!("cannot open {}: {e}", path.display())))?;
                let field: ScalarField<T> = read_snapshot(BufReader::new(f))?;
                if !field.grid().same_shape(grid) {
                    return Err(Error::GridMismatch);
                }
                Ok(ScalarField::from_values(*grid, field.into_values())?)
            }
        }
    }
}

/// Prepared orientation data `(∂Φ(α(η₀); ·) + I)⁻¹(w* + θ_raw)`, where `w*`
/// stands for an element of the subdifferential at `θ_raw` (zero for smooth data).
pub fn prepare_initial_theta<T: Real, M: ModelFunctions<T> + ?Sized>(
    eta0: &ScalarField<T>,
    theta0_raw: &ScalarField<T>,
    wstar: &ScalarField<T>,
    epsilon: T,
    kappa: T,
    model: &M,
) -> Result<ScalarField<T>> {
    if !wstar.grid().same_shape(theta0_raw.grid()) || !eta0.grid().same_shape(theta0_raw.grid()) {
        return Err(Error::GridMismatch);
    }
    let beta = eta0.map(|r| model.alpha(r));
    let (theta, _) = singular_resolvent(&SingularResolventProblem::unit_weight(beta, kappa, wstar + theta0_raw, epsilon))?;
    Ok(theta)
}

/// `(∂_t η, ∂_t θ)` at the initial time, solved from the continuous equations.
pub fn initial_velocities<T: Real, M: ModelFunctions<T> + ?Sized>(
    state: &SystemState<T>,
    model: &M,
    params: &Parameters<T>,
    forcings: &dyn Forcings<T>,
) -> Result<(ScalarField<T>, ScalarField<T>)> {
    let grid = *state.eta.grid();
    let u = forcings.u(state.time, &grid);
    let v = forcings.v(state.time, &grid);
    let gc = gamma_cell(&state.theta, params.epsilon);
    let mut rhs_eta = laplacian_neumann(&state.eta);
    for i in 0..grid.len() {
        let r = state.eta.values()[i];
        rhs_eta.values_mut()[i] += u.values()[i] - model.g(r) - model.alpha_d1(r) * gc.values()[i];
    }
    let (p0, _) = linear_resolvent(&LinearResolventProblem::unit_weight(params.mu * params.mu, rhs_eta))?;

    let beta: Vec<T> = state.eta.values().iter().map(|&r| model.alpha(r)).collect();
    let gr = grad(&state.theta);
    let mut flux = singular_flux(&beta, &gr, params.epsilon);
    for a in 0..grid.dim() {
        for (f, &d) in flux.component_mut(a).iter_mut().zip(gr.component(a)) {
            *f += params.kappa * d;
        }
    }
    let rhs_theta = &div(&flux) + &v;
    let m = state.eta.map(|r| model.alpha0(r));
    let (z0, _) = linear_resolvent(&LinearResolventProblem { lambda: params.nu * params.nu, m, z: rhs_theta })?;
    Ok((p0, z0))
}
