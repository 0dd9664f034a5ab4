use serde::{Deserialize, Serialize};

use crate::calculus::{dirichlet_sq, grad, Grid, ScalarField, VectorField};
use crate::error::{Error, Result};
use crate::model::functions::ModelFunctions;
use crate::model::gamma::{gamma2, grad_gamma2};
use crate::model::params::Parameters;
use crate::scalar::Real;

/// Components of the free energy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown<T> {
    /// `½∫|∇η|²`
    pub dirichlet: T,
    /// `∫G(η)`
    pub potential: T,
    /// `∫α(η)γ_ε(∇θ) + (κ/2)∫|∇θ|²`
    pub interfacial: T,
    pub total: T,
}

/// Gradient vector seen from one cell corner.
#[inline]
pub(crate) fn corner_vector<T: Real>(gr: &VectorField<T>, corner: [Option<usize>; 2]) -> [T; 2] {
    [gr.face(0, corner[0]), gr.face(1, corner[1])]
}

#[inline]
pub(crate) fn corner_weight<T: Real>(grid: &Grid<T>) -> T {
    T::one() / T::from_count(grid.corners_per_cell())
}

/// Cell value of `γ_ε(∇θ)`: the mean of `γ_ε` over the `2^d` corner gradients
/// formed from the faces adjacent to the cell.
///
/// This is the quantity whose weighted sum defines the discrete interfacial
/// energy, so `∂/∂η_i` of that energy is exactly `α'(η_i) γ_cell_i |cell|`.
pub fn gamma_cell<T: Real>(theta: &ScalarField<T>, epsilon: T) -> ScalarField<T> {
    gamma_cell_from_grad(&grad(theta), epsilon)
}

pub(crate) fn gamma_cell_from_grad<T: Real>(gr: &VectorField<T>, epsilon: T) -> ScalarField<T> {
    let g = *gr.grid();
    let w = corner_weight(&g);
    let vals = (0..g.len())
        .map(|idx| g.corners(idx).map(|c| gamma2(corner_vector(gr, c), epsilon)).sum::<T>() * w)
        .collect();
    ScalarField::from_values(g, vals).expect("finite corner values")
}

/// Face flux of `β ∇γ_ε(∇θ)` consistent with the corner quadrature, i.e. the
/// field `F` with `dΦ/dθ = -div F` for the `β`-weighted part of `Φ`.
pub(crate) fn singular_flux<T: Real>(beta: &[T], gr: &VectorField<T>, epsilon: T) -> VectorField<T> {
    let g = *gr.grid();
    let w = corner_weight(&g);
    let mut flux = VectorField::zeros(g);
    for (idx, &b) in beta.iter().enumerate() {
        let bw = b * w;
        if bw == T::zero() {
            continue;
        }
        for c in g.corners(idx) {
            let q = grad_gamma2(corner_vector(gr, c), epsilon);
            for a in 0..g.dim() {
                if let Some(s) = c[a] {
                    flux.component_mut(a)[s] += bw * q[a];
                }
            }
        }
    }
    flux
}

/// `∫ β γ_ε(∇θ) + (κ/2) ∫ |∇θ|²`.
pub fn interfacial_energy<T: Real>(beta: &ScalarField<T>, theta: &ScalarField<T>, epsilon: T, kappa: T) -> Result<T> {
    if !beta.grid().same_shape(theta.grid()) {
        return Err(Error::GridMismatch);
    }
    if beta.values().iter().any(|&b| b < T::zero()) {
        return Err(Error::InvalidArgument("interfacial weight must be nonnegative".into()));
    }
    let gr = grad(theta);
    let gc = gamma_cell_from_grad(&gr, epsilon);
    let weighted: T = beta.values().iter().zip(gc.values()).map(|(&b, &c)| b * c).sum();
    let vol = theta.grid().cell_volume();
    let dir = crate::calculus::inner_faces(&gr, &gr)?;
    Ok(weighted * vol + T::lit(0.5) * kappa * dir)
}

/// Discrete free energy and its parts.
pub fn kwc_energy<T: Real, M: ModelFunctions<T> + ?Sized>(
    eta: &ScalarField<T>,
    theta: &ScalarField<T>,
    model: &M,
    params: &Parameters<T>,
) -> Result<EnergyBreakdown<T>> {
    if !eta.is_finite() {
        return Err(Error::NonFinite("eta"));
    }
    if !theta.is_finite() {
        return Err(Error::NonFinite("theta"));
    }
    let vol = eta.grid().cell_volume();
    let dirichlet = T::lit(0.5) * dirichlet_sq(eta);
    let potential = eta.values().iter().map(|&r| model.potential(r)).sum::<T>() * vol;
    let beta = eta.map(|r| model.alpha(r));
    let interfacial = interfacial_energy(&beta, theta, params.epsilon, params.kappa)?;
    let total = dirichlet + potential + interfacial;
    if !total.is_finite() {
        return Err(Error::NonFinite("energy"));
    }
    Ok(EnergyBreakdown { dirichlet, potential, interfacial, total })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::{div, inner_h};
    use crate::model::functions::ReferenceModel;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn simpson(f: impl Fn(f64) -> f64, n: usize) -> f64 {
        let h = 1.0 / n as f64;
        let mut s = f(0.0) + f(1.0);
        for k in 1..n {
            s += if k % 2 == 1 { 4.0 } else { 2.0 } * f(k as f64 * h);
        }
        s * h / 3.0
    }

    #[test]
    fn constant_theta_gives_epsilon_times_weight() {
        let g = Grid::<f64>::unit_1d(16).unwrap();
        let e = interfacial_energy(&ScalarField::constant(g, 1.0), &ScalarField::constant(g, 3.0), 0.5, 0.7).unwrap();
        assert!((e - 0.5).abs() < 1e-14);
    }

    #[test]
    fn zero_weight_leaves_gradient_term() {
        let g = Grid::<f64>::unit_2d(8).unwrap();
        let th = ScalarField::from_fn(g, |x| x[0] * x[1]);
        let e = interfacial_energy(&ScalarField::zeros(g), &th, 0.5, 0.3).unwrap();
        assert!((e - 0.15 * dirichlet_sq(&th)).abs() < 1e-14);
    }

    #[test]
    fn negative_weight_rejected() {
        let g = Grid::<f64>::unit_1d(8).unwrap();
        let b = ScalarField::from_fn(g, |x| x[0] - 0.5);
        assert!(interfacial_energy(&b, &ScalarField::zeros(g), 0.5, 1.0).is_err());
    }

    #[test]
    fn cosine_profile_matches_quadrature() {
        let oracle = simpson(|x| (1.0 + PI * PI * (PI * x).sin().powi(2)).sqrt(), 100_000);
        assert!((oracle - 2.304_892_661_4).abs() < 1e-9, "{oracle}");
        let mut prev = f64::INFINITY;
        for n in [64, 128, 256] {
            let g = Grid::<f64>::unit_1d(n).unwrap();
            let th = ScalarField::from_fn(g, |x| (PI * x[0]).cos());
            let e = interfacial_energy(&ScalarField::constant(g, 1.0), &th, 1.0, 0.0).unwrap();
            let err = (e - oracle).abs();
            assert!(err < 10.0 / (n * n) as f64, "n={n} err={err}");
            assert!(err < prev);
            prev = err;
        }
    }

    #[test]
    fn constant_state_energy() {
        let g = Grid::<f64>::unit_1d(16).unwrap();
        let m = ReferenceModel::<f64>::default();
        let p = Parameters::new(0.1, 0.5, 1.0);
        let e = kwc_energy(&ScalarField::constant(g, 1.0), &ScalarField::zeros(g), &m, &p).unwrap();
        assert!((e.total - 0.5 * m.alpha(1.0)).abs() < 1e-14);
        let e0 = kwc_energy(&ScalarField::zeros(g), &ScalarField::zeros(g), &m, &p).unwrap();
        assert_eq!(e0.dirichlet, 0.0);
        assert!((e0.potential - m.potential(0.0)).abs() < 1e-14);
        assert!((e0.interfacial - 0.5 * m.alpha(0.0)).abs() < 1e-14);
    }

    #[test]
    fn flux_is_energy_gradient() {
        // directional derivative of the β-weighted part equals -(div F, v)
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for g in [Grid::<f64>::unit_1d(12).unwrap(), Grid::new(2, &[6, 7], &[1.0, 1.3]).unwrap()] {
            let beta = ScalarField::from_fn(g, |x| 1.0 + x[0] + 0.5 * x[1]);
            let th = ScalarField::from_values(g, (0..g.len()).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap();
            let v = ScalarField::from_values(g, (0..g.len()).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap();
            let eps = 0.3;
            let f = |t: f64| {
                let mut w = th.clone();
                w.axpy(t, &v);
                interfacial_energy(&beta, &w, eps, 0.0).unwrap()
            };
            let s = 1e-6;
            let fd = (f(s) - f(-s)) / (2.0 * s);
            let flux = singular_flux(beta.values(), &grad(&th), eps);
            let an = -inner_h(&div(&flux), &v).unwrap();
            assert!((fd - an).abs() < 1e-6 * an.abs().max(1.0), "{fd} vs {an}");
        }
    }

    #[test]
    fn energy_invariant_under_theta_shift() {
        let g = Grid::<f64>::unit_2d(8).unwrap();
        let m = ReferenceModel::<f64>::default();
        let p = Parameters::new(0.1, 0.2, 1.0);
        let eta = ScalarField::from_fn(g, |x| 1.0 + 0.3 * (PI * x[0]).cos());
        let th = ScalarField::from_fn(g, |x| (2.0 * PI * x[1]).cos() * x[0]);
        let a = kwc_energy(&eta, &th, &m, &p).unwrap();
        let b = kwc_energy(&eta, &th.map(|v| v + 2.5), &m, &p).unwrap();
        assert!((a.total - b.total).abs() < 1e-13);
    }

    #[test]
    fn monotone_in_epsilon_and_kappa() {
        let g = Grid::<f64>::unit_1d(32).unwrap();
        let b = ScalarField::from_fn(g, |x| 0.5 + x[0]);
        let th = ScalarField::from_fn(g, |x| (3.0 * x[0]).sin());
        let e = |eps, k| interfacial_energy(&b, &th, eps, k).unwrap();
        assert!(e(0.1, 0.5) <= e(0.2, 0.5));
        assert!(e(0.2, 0.5) <= e(0.2, 0.6));
        assert!(e(0.1, 0.0) >= 0.1 * b.integral());
    }

    #[test]
    fn non_finite_fields_rejected() {
        let g = Grid::<f64>::unit_1d(8).unwrap();
        assert!(ScalarField::from_values(g, vec![f64::NAN; 8]).is_err());
    }
}
