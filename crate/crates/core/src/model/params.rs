use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Physical and discretization parameters of one run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Parameters<T> {
    /// Coefficient of the isotropic gradient term, must be positive.
    pub kappa: T,
    /// Regularization of the norm, in `(0, 1]`.
    pub epsilon: T,
    /// Final time.
    #[serde(rename = "T")]
    pub t_final: T,
    pub dt: T,
    /// Damping of `∂_t η`; zero gives the parabolic system.
    #[serde(default)]
    pub mu: T,
    /// Damping of `∂_t θ`; zero gives the parabolic system.
    #[serde(default)]
    pub nu: T,
}

impl<T: Real> Parameters<T> {
    /// Parameters with `dt = 1e-3 T` and no damping.
    pub fn new(kappa: T, epsilon: T, t_final: T) -> Self {
        Self { kappa, epsilon, t_final, dt: T::lit(1e-3) * t_final, mu: T::zero(), nu: T::zero() }
    }

    pub fn with_dt(mut self, dt: T) -> Self {
        self.dt = dt;
        self
    }

    pub fn with_damping(mut self, mu: T, nu: T) -> Self {
        self.mu = mu;
        self.nu = nu;
        self
    }

    pub fn is_parabolic(&self) -> bool {
        self.mu == T::zero() && self.nu == T::zero()
    }

    /// Every violated constraint, keyed by parameter name.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !(self.kappa > T::zero()) || !self.kappa.is_finite() {
            out.push(format!("kappa: must be positive (A1), got {}", self.kappa));
        }
        if !(self.epsilon > T::zero() && self.epsilon <= T::one()) {
            out.push(format!("epsilon: must lie in (0, 1], got {}", self.epsilon));
        }
        if !(self.t_final > T::zero()) || !self.t_final.is_finite() {
            out.push(format!("T: must be positive, got {}", self.t_final));
        }
        if !(self.dt > T::zero()) || !self.dt.is_finite() {
            out.push(format!("dt: must be positive, got {}", self.dt));
        } else if self.dt > self.t_final {
            out.push(format!("dt: {} exceeds T = {}", self.dt, self.t_final));
        }
        for (name, v) in [("mu", self.mu), ("nu", self.nu)] {
            if !(v >= T::zero() && v < T::one()) {
                out.push(format!("{name}: must lie in [0, 1), got {v}"));
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidArgument(v.join("; ")))
        }
    }

    /// Number of steps to reach `T`; errors when `dt` does not divide `T`.
    pub fn step_count(&self) -> Result<usize> {
        let ratio = (self.t_final / self.dt).as_f64();
        let n = ratio.round();
        if n < 1.0 || (ratio - n).abs() > 1e-6 * n.max(1.0) {
            return Err(Error::InvalidArgument(format!(
                "dt = {} does not divide T = {}",
                self.dt, self.t_final
            )));
        }
        Ok(n as usize)
    }
}
