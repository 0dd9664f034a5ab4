use crate::calculus::{div_into, grad_slice, neg_laplacian_diagonal, neg_laplacian_into, norm_h, Grid, ScalarField, VectorField};
use crate::elliptic::cg::{pcg, SpdOperator};
use crate::elliptic::{cg_max_iter, SolveMethod, SolveReport, SolverOptions};
use crate::elliptic::linear::rounding_residual;
use crate::error::{Error, Result};
use crate::model::{corner_vector, corner_weight, gamma_cell_from_grad, gamma2, hess_gamma2, singular_flux};
use crate::scalar::Real;

/// `-div(β ∇γ_ε(∇w) + κ_eff ∇w) + m w = z`.
#[derive(Debug, Clone)]
pub struct SingularResolventProblem<T> {
    pub beta: ScalarField<T>,
    pub kappa_eff: T,
    pub m: ScalarField<T>,
    pub z: ScalarField<T>,
    pub epsilon: T,
}

impl<T: Real> SingularResolventProblem<T> {
    /// `m ≡ 1`.
    pub fn unit_weight(beta: ScalarField<T>, kappa_eff: T, z: ScalarField<T>, epsilon: T) -> Self {
        let m = ScalarField::constant(*z.grid(), T::one());
        Self { beta, kappa_eff, m, z, epsilon }
    }

    fn validate(&self) -> Result<()> {
        let g = self.z.grid();
        if !self.beta.grid().same_shape(g) || !self.m.grid().same_shape(g) {
            return Err(Error::GridMismatch);
        }
        if self.beta.min_value() < T::zero() {
            return Err(Error::InvalidArgument("mobility weight beta must be nonnegative".into()));
        }
        if !(self.kappa_eff > T::zero()) {
            return Err(Error::InvalidArgument(format!("kappa_eff must be positive, got {}", self.kappa_eff)));
        }
        if !(self.m.min_value() > T::zero()) {
            return Err(Error::InvalidArgument("zeroth-order weight must be positive".into()));
        }
        if !(self.epsilon > T::zero()) {
            return Err(Error::InvalidArgument("epsilon must be positive".into()));
        }
        if !self.z.is_finite() || !self.beta.is_finite() || !self.m.is_finite() {
            return Err(Error::NonFinite("singular resolvent data"));
        }
        Ok(())
    }

    fn objective(&self, w: &[T]) -> T {
        let g = self.z.grid();
        let gr = grad_slice(g, w);
        let gc = gamma_cell_from_grad(&gr, self.epsilon);
        let mut acc = T::zero();
        let half = T::lit(0.5);
        for i in 0..w.len() {
            acc += self.beta.values()[i] * gc.values()[i] + half * self.m.values()[i] * w[i] * w[i]
                - self.z.values()[i] * w[i];
        }
        let mut dir = T::zero();
        for a in 0..g.dim() {
            dir += gr.component(a).iter().map(|&v| v * v).sum::<T>();
        }
        (acc + half * self.kappa_eff * dir) * g.cell_volume()
    }

    fn residual_slice(&self, w: &[T]) -> Vec<T> {
        let g = self.z.grid();
        let gr = grad_slice(g, w);
        let mut flux = singular_flux(self.beta.values(), &gr, self.epsilon);
        for a in 0..g.dim() {
            for (f, &d) in flux.component_mut(a).iter_mut().zip(gr.component(a)) {
                *f += self.kappa_eff * d;
            }
        }
        let mut out = vec![T::zero(); w.len()];
        div_into(&flux, &mut out);
        for i in 0..w.len() {
            out[i] = -out[i] + self.m.values()[i] * w[i] - self.z.values()[i];
        }
        out
    }
}

/// Discrete Euler–Lagrange residual `-div(β∇γ_ε(∇w) + κ_eff ∇w) + m w - z`.
pub fn singular_residual<T: Real>(problem: &SingularResolventProblem<T>, w: &ScalarField<T>) -> ScalarField<T> {
    ScalarField::from_values_unchecked(*w.grid(), problem.residual_slice(w.values()))
}

/// `v ↦ -div(Σ_corners M_c D_c v + κ D v) + m v` with one symmetric 2×2 matrix per cell corner.
struct CornerOperator<'a, T> {
    grid: Grid<T>,
    corners: Vec<[Option<usize>; 2]>,
    mats: Vec<[[T; 2]; 2]>,
    kappa: T,
    m: &'a [T],
}

impl<'a, T: Real> CornerOperator<'a, T> {
    fn build(
        problem: &'a SingularResolventProblem<T>,
        w: &[T],
        mat: impl Fn([T; 2]) -> [[T; 2]; 2],
    ) -> Self {
        let grid = *problem.z.grid();
        let gr = grad_slice(&grid, w);
        let cw = corner_weight(&grid);
        let per = grid.corners_per_cell();
        let mut corners = Vec::with_capacity(grid.len() * per);
        let mut mats = Vec::with_capacity(grid.len() * per);
        for idx in 0..grid.len() {
            let s = problem.beta.values()[idx] * cw;
            for c in grid.corners(idx) {
                let h = mat(corner_vector(&gr, c));
                corners.push(c);
                mats.push([[s * h[0][0], s * h[0][1]], [s * h[1][0], s * h[1][1]]]);
            }
        }
        Self { grid, corners, mats, kappa: problem.kappa_eff, m: problem.m.values() }
    }
}

impl<T: Real> SpdOperator<T> for CornerOperator<'_, T> {
    fn apply(&self, x: &[T], y: &mut [T]) {
        let g = &self.grid;
        let gv = grad_slice(g, x);
        let mut flux = VectorField::zeros(*g);
        for (c, mat) in self.corners.iter().zip(&self.mats) {
            let v = corner_vector(&gv, *c);
            for a in 0..g.dim() {
                if let Some(s) = c[a] {
                    flux.component_mut(a)[s] += mat[a][0] * v[0] + mat[a][1] * v[1];
                }
            }
        }
        div_into(&flux, y);
        let mut lap = vec![T::zero(); x.len()];
        neg_laplacian_into(g, x, &mut lap);
        for i in 0..x.len() {
            y[i] = -y[i] + self.kappa * lap[i] + self.m[i] * x[i];
        }
    }

    fn diagonal(&self) -> Vec<T> {
        let g = &self.grid;
        let mut d: Vec<T> = neg_laplacian_diagonal(g)
            .into_iter()
            .zip(self.m)
            .map(|(l, &m)| self.kappa * l + m)
            .collect();
        for (c, mat) in self.corners.iter().zip(&self.mats) {
            // cells touched by this corner and their coefficients in D_c
            let mut cells: [(usize, [T; 2]); 4] = [(usize::MAX, [T::zero(); 2]); 4];
            let mut count = 0;
            for a in 0..g.dim() {
                if let Some(s) = c[a] {
                    let inv_h = T::one() / g.spacing()[a];
                    for (cell, coef) in [(s, -inv_h), (s + g.stride(a), inv_h)] {
                        match cells[..count].iter_mut().find(|(k, _)| *k == cell) {
                            Some(entry) => entry.1[a] = coef,
                            None => {
                                let mut e = [T::zero(); 2];
                                e[a] = coef;
                                cells[count] = (cell, e);
                                count += 1;
                            }
                        }
                    }
                }
            }
            for &(k, e) in &cells[..count] {
                d[k] += e[0] * (mat[0][0] * e[0] + mat[0][1] * e[1]) + e[1] * (mat[1][0] * e[0] + mat[1][1] * e[1]);
            }
        }
        d
    }
}

#[derive(Clone, Copy)]
enum Phase {
    Newton,
    Lagged,
}

struct Progress<T> {
    iterations: usize,
    inner: usize,
    residual: T,
    tolerance: T,
    converged: bool,
}

fn iterate<T: Real>(
    problem: &SingularResolventProblem<T>,
    w: &mut Vec<T>,
    phase: Phase,
    max_iter: usize,
    tol: T,
    opts: &SolverOptions,
) -> Progress<T> {
    let g = *problem.z.grid();
    let vol = g.cell_volume();
    let eps = problem.epsilon;
    let cg_tol = T::tol(opts.cg_rel_tol, 100.0);
    let mut inner = 0;
    let mut r = problem.residual_slice(w);
    let mut res = h_norm(&r, vol);
    for it in 0..max_iter {
        if res <= tol {
            return Progress { iterations: it, inner, residual: res, tolerance: tol, converged: true };
        }
        if !res.is_finite() {
            break;
        }
        let (dir, cg_iters) = match phase {
            Phase::Newton => {
                let op = CornerOperator::build(problem, w, |y| hess_gamma2(y, eps));
                let rhs: Vec<T> = r.iter().map(|&v| -v).collect();
                let mut d = vec![T::zero(); w.len()];
                let out = pcg(&op, &rhs, &mut d, cg_tol, cg_max_iter(g.len()));
                (d, out.iterations)
            }
            Phase::Lagged => {
                let op = CornerOperator::build(problem, w, |y| {
                    let inv = T::one() / gamma2(y, eps);
                    [[inv, T::zero()], [T::zero(), inv]]
                });
                let mut next = w.clone();
                let out = pcg(&op, problem.z.values(), &mut next, cg_tol, cg_max_iter(g.len()));
                let d: Vec<T> = next.iter().zip(w.iter()).map(|(&a, &b)| a - b).collect();
                (d, out.iterations)
            }
        };
        inner += cg_iters;
        let slope: T = r.iter().zip(&dir).map(|(&a, &b)| a * b).sum::<T>() * vol;
        if !(slope < T::zero()) {
            break;
        }
        let j0 = problem.objective(w);
        let slack = T::lit(16.0) * T::epsilon() * j0.abs().max(T::one());
        let mut t = T::one();
        let mut accepted = false;
        let mut trial = w.clone();
        for _ in 0..40 {
            for i in 0..w.len() {
                trial[i] = w[i] + t * dir[i];
            }
            if problem.objective(&trial) <= j0 + T::lit(1e-4) * t * slope + slack {
                accepted = true;
                break;
            }
            t = t * T::lit(0.5);
        }
        if !accepted {
            break;
        }
        std::mem::swap(w, &mut trial);
        r = problem.residual_slice(w);
        res = h_norm(&r, vol);
    }
    // Stalled: accept when the residual is at the level of rounding noise.
    let target = tol.max(attainable_residual(problem, w));
    Progress { iterations: max_iter, inner, residual: res, tolerance: target, converged: res <= target }
}

/// Residual of the correctly rounded solution, `2 u |diag J| |w|` in `H`,
/// with `J` the Jacobian at `w` and `u` the unit roundoff.
fn attainable_residual<T: Real>(problem: &SingularResolventProblem<T>, w: &[T]) -> T {
    let eps = problem.epsilon;
    let diag = CornerOperator::build(problem, w, |y| hess_gamma2(y, eps)).diagonal();
    rounding_residual(&diag, w, problem.z.grid().cell_volume())
}

fn h_norm<T: Real>(v: &[T], vol: T) -> T {
    (v.iter().map(|&x| x * x).sum::<T>() * vol).sqrt()
}

/// Solves the weighted singular resolvent problem starting from `z / m`.
pub fn singular_resolvent<T: Real>(problem: &SingularResolventProblem<T>) -> Result<(ScalarField<T>, SolveReport<T>)> {
    let guess = problem.z.zip_map(&problem.m, |z, m| z / m);
    singular_resolvent_with_guess(problem, &guess, &SolverOptions::default())
}

/// Newton's method with a line search on the strictly convex objective
/// `Φ(β; w) + ½|√m w|² - (z, w)`; falls back to damped lagged diffusivity
/// when Newton stalls.
pub fn singular_resolvent_with_guess<T: Real>(
    problem: &SingularResolventProblem<T>,
    guess: &ScalarField<T>,
    opts: &SolverOptions,
) -> Result<(ScalarField<T>, SolveReport<T>)> {
    problem.validate()?;
    if !guess.grid().same_shape(problem.z.grid()) {
        return Err(Error::GridMismatch);
    }
    let g = *problem.z.grid();
    let mut w = guess.values().to_vec();
    let tol = (T::lit(opts.nonlinear_rel_tol) * (norm_h(&problem.z) + T::one()))
        .max(T::lit(4.0) * attainable_residual(problem, &w));
    let mut total_inner = 0;
    let mut total_outer = 0;
    if !opts.force_fixed_point {
        let p = iterate(problem, &mut w, Phase::Newton, opts.newton_max_iter, tol, opts);
        total_inner += p.inner;
        total_outer += p.iterations;
        let mut method = SolveMethod::Newton;
        let mut done = p.converged.then_some((p.residual, p.tolerance));
        if done.is_none() {
            // Newton from a poor guess at small ε crawls through tiny damped
            // steps; walk ε down from a coarse value instead.
            method = SolveMethod::NewtonContinuation;
            w = guess.values().to_vec();
            let mut stages = Vec::new();
            let mut e = problem.epsilon;
            while e < T::lit(0.5) && stages.len() < 30 {
                e = e * T::lit(2.0);
                stages.push(e);
            }
            let loose = T::tol(1e-6, 1e4) * (norm_h(&problem.z) + T::one());
            let mut stage_problem = problem.clone();
            for &e in stages.iter().rev() {
                stage_problem.epsilon = e;
                let p = iterate(&stage_problem, &mut w, Phase::Newton, opts.newton_max_iter, loose.max(tol), opts);
                total_inner += p.inner;
                total_outer += p.iterations;
                if !p.converged {
                    break;
                }
            }
            let p = iterate(problem, &mut w, Phase::Newton, opts.newton_max_iter, tol, opts);
            total_inner += p.inner;
            total_outer += p.iterations;
            done = p.converged.then_some((p.residual, p.tolerance));
        }
        if let Some((residual, tolerance)) = done {
            let report = SolveReport {
                method,
                iterations: total_outer,
                inner_iterations: total_inner,
                final_residual_h: residual,
                tolerance,
                converged: true,
            };
            return Ok((ScalarField::from_values_unchecked(g, w), report));
        }
        if w.iter().any(|v| !v.is_finite()) {
            w = guess.values().to_vec();
        }
    }
    let p = iterate(problem, &mut w, Phase::Lagged, opts.fixed_point_max_iter, tol, opts);
    total_inner += p.inner;
    total_outer += p.iterations;
    let report = SolveReport {
        method: SolveMethod::LaggedDiffusivity,
        iterations: total_outer,
        inner_iterations: total_inner,
        final_residual_h: p.residual,
        tolerance: p.tolerance,
        converged: p.converged,
    };
    if p.converged {
        Ok((ScalarField::from_values_unchecked(g, w), report))
    } else {
        Err(Error::Solver(format!(
            "singular resolvent did not converge: residual {} > {} after {} iterations",
            report.final_residual_h, report.tolerance, report.iterations
        )))
    }
}
