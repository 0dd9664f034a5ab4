use std::sync::Arc;

use crate::calculus::{Grid, ScalarField};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Source terms `u` (η-equation) and `v` (θ-equation) as functions of time.
pub trait Forcings<T: Real>: Send + Sync {
    fn u(&self, t: T, grid: &Grid<T>) -> ScalarField<T>;
    fn v(&self, t: T, grid: &Grid<T>) -> ScalarField<T>;

    /// True when both forcings vanish identically.
    fn is_zero(&self) -> bool {
        false
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroForcing;

impl<T: Real> Forcings<T> for ZeroForcing {
    fn u(&self, _t: T, grid: &Grid<T>) -> ScalarField<T> {
        ScalarField::zeros(*grid)
    }
    fn v(&self, _t: T, grid: &Grid<T>) -> ScalarField<T> {
        ScalarField::zeros(*grid)
    }
    fn is_zero(&self) -> bool {
        true
    }
}

/// Spatially and temporally constant forcings.
#[derive(Debug, Clone, Copy)]
pub struct ConstantForcing<T> {
    pub u: T,
    pub v: T,
}

impl<T: Real> Forcings<T> for ConstantForcing<T> {
    fn u(&self, _t: T, grid: &Grid<T>) -> ScalarField<T> {
        ScalarField::constant(*grid, self.u)
    }
    fn v(&self, _t: T, grid: &Grid<T>) -> ScalarField<T> {
        ScalarField::constant(*grid, self.v)
    }
    fn is_zero(&self) -> bool {
        self.u == T::zero() && self.v == T::zero()
    }
}

type PointFn<T> = Arc<dyn Fn(T, [T; 2]) -> T + Send + Sync>;

/// Closed-form forcings `u(t, x)`, `v(t, x)` sampled at cell centers.
#[derive(Clone)]
pub struct FnForcing<T> {
    u: PointFn<T>,
    v: PointFn<T>,
}

impl<T: Real> FnForcing<T> {
    pub fn new(
        u: impl Fn(T, [T; 2]) -> T + Send + Sync + 'static,
        v: impl Fn(T, [T; 2]) -> T + Send + Sync + 'static,
    ) -> Self {
        Self { u: Arc::new(u), v: Arc::new(v) }
    }
}

impl<T: Real> Forcings<T> for FnForcing<T> {
    fn u(&self, t: T, grid: &Grid<T>) -> ScalarField<T> {
        ScalarField::from_fn(*grid, |x| (self.u)(t, x))
    }
    fn v(&self, t: T, grid: &Grid<T>) -> ScalarField<T> {
        ScalarField::from_fn(*grid, |x| (self.v)(t, x))
    }
}

/// Forcing fields tabulated at increasing times, linearly interpolated and
/// held constant outside the table.
#[derive(Debug, Clone)]
pub struct TabulatedForcing<T> {
    u: Vec<(T, ScalarField<T>)>,
    v: Vec<(T, ScalarField<T>)>,
}

impl<T: Real> TabulatedForcing<T> {
    pub fn new(u: Vec<(T, ScalarField<T>)>, v: Vec<(T, ScalarField<T>)>) -> Result<Self> {
        for table in [&u, &v] {
            if table.is_empty() {
                return Err(Error::InvalidArgument("forcing table is empty".into()));
            }
            if table.windows(2).any(|w| !(w[1].0 > w[0].0)) {
                return Err(Error::InvalidArgument("forcing table times must increase".into()));
            }
        }
        Ok(Self { u, v })
    }

    fn interpolate(table: &[(T, ScalarField<T>)], t: T, grid: &Grid<T>) -> ScalarField<T> {
        let pick = |f: &ScalarField<T>| {
            assert!(f.grid().same_shape(grid), "tabulated forcing on a different grid");
            f.clone()
        };
        if t <= table[0].0 {
            return pick(&table[0].1);
        }
        for w in table.windows(2) {
            let (t0, f0) = (&w[0].0, &w[0].1);
            let (t1, f1) = (&w[1].0, &w[1].1);
            if t <= *t1 {
                let s = (t - *t0) / (*t1 - *t0);
                return pick(f0).zip_map(f1, |a, b| a + s * (b - a));
            }
        }
        pick(&table[table.len() - 1].1)
    }
}

impl<T: Real> Forcings<T> for TabulatedForcing<T> {
    fn u(&self, t: T, grid: &Grid<T>) -> ScalarField<T> {
        Self::interpolate(&self.u, t, grid)
    }
    fn v(&self, t: T, grid: &Grid<T>) -> ScalarField<T> {
        Self::interpolate(&self.v, t, grid)
    }
}
