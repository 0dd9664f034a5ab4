use std::ops::{Add, Mul, Neg, Sub};

use crate::calculus::grid::Grid;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// One real value per cell.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField<T> {
    grid: Grid<T>,
    values: Vec<T>,
}

impl<T: Real> ScalarField<T> {
    /// Wraps values, checking length and finiteness.
    pub fn from_values(grid: Grid<T>, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Malformed(format!(
                "{} values for a grid of {} cells",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("scalar field"));
        }
        Ok(Self { grid, values })
    }

    pub(crate) fn from_values_unchecked(grid: Grid<T>, values: Vec<T>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    pub fn constant(grid: Grid<T>, c: T) -> Self {
        Self { grid, values: vec![c; grid.len()] }
    }

    pub fn zeros(grid: Grid<T>) -> Self {
        Self::constant(grid, T::zero())
    }

    /// Samples `f` at cell centers.
    pub fn from_fn(grid: Grid<T>, f: impl Fn([T; 2]) -> T) -> Self {
        let values = (0..grid.len()).map(|i| f(grid.center(i))).collect();
        Self { grid, values }
    }

    #[inline]
    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    #[inline]
    pub fn values(&self) -> &[T] {
        &self.values
    }

    #[inline]
    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self { grid: self.grid, values: self.values.iter().map(|&v| f(v)).collect() }
    }

    /// Pointwise combination; panics on grid mismatch.
    pub fn zip_map(&self, other: &Self, f: impl Fn(T, T) -> T) -> Self {
        assert!(self.grid.same_shape(&other.grid), "pointwise op on mismatched grids");
        Self {
            grid: self.grid,
            values: self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
        }
    }

    /// `self += a * x`
    pub fn axpy(&mut self, a: T, x: &Self) {
        assert!(self.grid.same_shape(&x.grid), "axpy on mismatched grids");
        for (s, &xv) in self.values.iter_mut().zip(&x.values) {
            *s += a * xv;
        }
    }

    pub fn min_value(&self) -> T {
        self.values.iter().copied().fold(T::infinity(), T::min)
    }

    pub fn max_value(&self) -> T {
        self.values.iter().copied().fold(T::neg_infinity(), T::max)
    }

    /// Cell-volume weighted integral.
    pub fn integral(&self) -> T {
        self.values.iter().copied().sum::<T>() * self.grid.cell_volume()
    }

    /// Largest absolute value.
    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }
}

impl<T: Real> Add for &ScalarField<T> {
    type Output = ScalarField<T>;
    fn add(self, rhs: Self) -> ScalarField<T> {
        self.zip_map(rhs, |a, b| a + b)
    }
}

impl<T: Real> Sub for &ScalarField<T> {
    type Output = ScalarField<T>;
    fn sub(self, rhs: Self) -> ScalarField<T> {
        self.zip_map(rhs, |a, b| a - b)
    }
}

impl<T: Real> Mul<T> for &ScalarField<T> {
    type Output = ScalarField<T>;
    fn mul(self, rhs: T) -> ScalarField<T> {
        self.map(|a| a * rhs)
    }
}

impl<T: Real> Neg for &ScalarField<T> {
    type Output = ScalarField<T>;
    fn neg(self) -> ScalarField<T> {
        self.map(|a| -a)
    }
}

/// Face-staggered vector field.
///
/// Component `a` at slot `idx` is the value on the upper face of cell `idx`
/// along axis `a`. Slots of cells on the upper boundary hold boundary faces,
/// which carry zero normal flux and are ignored by [`crate::calculus::div`].
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField<T> {
    grid: Grid<T>,
    comps: [Vec<T>; 2],
}

impl<T: Real> VectorField<T> {
    pub fn zeros(grid: Grid<T>) -> Self {
        let n = grid.len();
        let second = if grid.dim() == 2 { vec![T::zero(); n] } else { Vec::new() };
        Self { grid, comps: [vec![T::zero(); n], second] }
    }

    /// Builds from per-axis face values; boundary-face slots are zeroed.
    pub fn from_components(grid: Grid<T>, comps: Vec<Vec<T>>) -> Result<Self> {
        if comps.len() != grid.dim() {
            return Err(Error::Malformed(format!(
                "{} components for a {}-dimensional grid",
                comps.len(),
                grid.dim()
            )));
        }
        let mut out = Self::zeros(grid);
        for (a, c) in comps.into_iter().enumerate() {
            if c.len() != grid.len() {
                return Err(Error::Malformed(format!("component {a} has {} values", c.len())));
            }
            if c.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite("vector field"));
            }
            out.comps[a] = c;
        }
        out.clear_boundary();
        Ok(out)
    }

    /// Samples `f` at upper face centers; boundary faces are set to zero.
    pub fn from_fn(grid: Grid<T>, f: impl Fn(usize, [T; 2]) -> T) -> Self {
        let mut out = Self::zeros(grid);
        for a in 0..grid.dim() {
            for idx in 0..grid.len() {
                if grid.has_upper_face(idx, a) {
                    out.comps[a][idx] = f(a, grid.upper_face_center(idx, a));
                }
            }
        }
        out
    }

    fn clear_boundary(&mut self) {
        for a in 0..self.grid.dim() {
            for idx in 0..self.grid.len() {
                if !self.grid.has_upper_face(idx, a) {
                    self.comps[a][idx] = T::zero();
                }
            }
        }
    }

    #[inline]
    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    #[inline]
    pub fn component(&self, axis: usize) -> &[T] {
        &self.comps[axis]
    }

    #[inline]
    pub fn component_mut(&mut self, axis: usize) -> &mut [T] {
        &mut self.comps[axis]
    }

    #[inline]
    pub(crate) fn face(&self, axis: usize, slot: Option<usize>) -> T {
        slot.map_or(T::zero(), |s| self.comps[axis][s])
    }

    pub fn is_finite(&self) -> bool {
        self.comps.iter().flatten().all(|v| v.is_finite())
    }

    /// Averages the two faces bounding each cell, per axis.
    pub fn cell_average(&self) -> Vec<[T; 2]> {
        let half = T::lit(0.5);
        let g = &self.grid;
        (0..g.len())
            .map(|idx| {
                let mi = g.multi_index(idx);
                let mut v = [T::zero(); 2];
                for a in 0..g.dim() {
                    let up = g.has_upper_face(idx, a).then_some(idx);
                    let down = (mi[a] > 0).then(|| idx - g.stride(a));
                    v[a] = half * (self.face(a, up) + self.face(a, down));
                }
                v
            })
            .collect()
    }
}
