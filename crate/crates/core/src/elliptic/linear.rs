use crate::calculus::{neg_laplacian_diagonal, neg_laplacian_into, norm_h, Grid, ScalarField};
use crate::elliptic::cg::{pcg, SpdOperator};
use crate::elliptic::{cg_max_iter, SolveMethod, SolveReport, SolverOptions};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// `-λ Δ_N w + m w = z`.
#[derive(Debug, Clone)]
pub struct LinearResolventProblem<T> {
    pub lambda: T,
    pub m: ScalarField<T>,
    pub z: ScalarField<T>,
}

impl<T: Real> LinearResolventProblem<T> {
    /// `m ≡ 1`.
    pub fn unit_weight(lambda: T, z: ScalarField<T>) -> Self {
        Self { lambda, m: ScalarField::constant(*z.grid(), T::one()), z }
    }

    fn validate(&self) -> Result<()> {
        if !self.m.grid().same_shape(self.z.grid()) {
            return Err(Error::GridMismatch);
        }
        if !(self.lambda >= T::zero()) || !self.lambda.is_finite() {
            return Err(Error::InvalidArgument(format!("lambda must be nonnegative, got {}", self.lambda)));
        }
        if !(self.m.min_value() > T::zero()) {
            return Err(Error::InvalidArgument("zeroth-order weight must be positive".into()));
        }
        if !self.z.is_finite() || !self.m.is_finite() {
            return Err(Error::NonFinite("linear resolvent data"));
        }
        Ok(())
    }

    /// `-λ Δ_N w + m w - z`
    pub fn residual(&self, w: &ScalarField<T>) -> ScalarField<T> {
        let g = *w.grid();
        let mut out = vec![T::zero(); g.len()];
        neg_laplacian_into(&g, w.values(), &mut out);
        for i in 0..g.len() {
            out[i] = self.lambda * out[i] + self.m.values()[i] * w.values()[i] - self.z.values()[i];
        }
        ScalarField::from_values_unchecked(g, out)
    }
}

struct ShiftedLaplacian<'a, T> {
    grid: Grid<T>,
    lambda: T,
    m: &'a [T],
}

impl<T: Real> SpdOperator<T> for ShiftedLaplacian<'_, T> {
    fn apply(&self, x: &[T], y: &mut [T]) {
        neg_laplacian_into(&self.grid, x, y);
        for i in 0..x.len() {
            y[i] = self.lambda * y[i] + self.m[i] * x[i];
        }
    }

    fn diagonal(&self) -> Vec<T> {
        neg_laplacian_diagonal(&self.grid)
            .into_iter()
            .zip(self.m)
            .map(|(d, &m)| self.lambda * d + m)
            .collect()
    }
}

/// Solves `-λ Δ_N w + m w = z` with homogeneous Neumann conditions.
///
/// `λ = 0` reduces to pointwise division. Non-convergence is reported through
/// `SolveReport::converged`, leaving the decision to the caller.
pub fn linear_resolvent<T: Real>(problem: &LinearResolventProblem<T>) -> Result<(ScalarField<T>, SolveReport<T>)> {
    linear_resolvent_with(problem, &SolverOptions::default())
}

pub(crate) fn linear_resolvent_with<T: Real>(
    problem: &LinearResolventProblem<T>,
    opts: &SolverOptions,
) -> Result<(ScalarField<T>, SolveReport<T>)> {
    problem.validate()?;
    let g = *problem.z.grid();
    let z = problem.z.values();
    let m = problem.m.values();
    let op = ShiftedLaplacian { grid: g, lambda: problem.lambda, m };
    let mut w: Vec<T> = z.iter().zip(m).map(|(&zi, &mi)| zi / mi).collect();
    // Floor at the residual of the correctly rounded solution; only binds in
    // low precision.
    let floor = T::lit(4.0) * rounding_residual(&op.diagonal(), &w, g.cell_volume());
    let tol = (T::lit(opts.linear_rel_tol) * norm_h(&problem.z)).max(floor);
    if problem.lambda == T::zero() {
        let w = ScalarField::from_values_unchecked(g, w);
        let res = norm_h(&problem.residual(&w));
        let report = SolveReport {
            method: SolveMethod::Pointwise,
            iterations: 0,
            inner_iterations: 0,
            final_residual_h: res,
            tolerance: tol,
            converged: res <= tol,
        };
        return Ok((w, report));
    }
    let mut cg_tol = T::tol(opts.cg_rel_tol, 100.0);
    let z_norm = norm_h(&problem.z);
    if z_norm > T::zero() {
        cg_tol = cg_tol.min(T::lit(0.5) * tol / z_norm).max(T::lit(opts.cg_rel_tol));
    }
    let out = pcg(&op, z, &mut w, cg_tol, cg_max_iter(g.len()));
    let w = ScalarField::from_values_unchecked(g, w);
    let res = norm_h(&problem.residual(&w));
    let report = SolveReport {
        method: SolveMethod::ConjugateGradient,
        iterations: out.iterations,
        inner_iterations: out.iterations,
        final_residual_h: res,
        tolerance: tol,
        converged: res <= tol && w.is_finite() && (out.converged || res <= tol),
    };
    Ok((w, report))
}

/// `2 u |D w|` in `H`: the residual left by rounding the exact solution, with
/// `D` the operator diagonal and `u` the unit roundoff.
pub(crate) fn rounding_residual<T: Real>(diag: &[T], w: &[T], vol: T) -> T {
    let s: T = diag.iter().zip(w).map(|(&d, &x)| (T::lit(2.0) * T::epsilon() * d * x).powi(2)).sum();
    (s * vol).sqrt()
}
