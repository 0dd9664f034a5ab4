//! The smoothed Euclidean norm `γ_ε(y) = sqrt(ε² + |y|²)` and its derivatives.

use crate::error::{Error, Result};
use crate::scalar::Real;

#[inline]
pub(crate) fn norm_sq<T: Real>(y: &[T]) -> T {
    y.iter().map(|&v| v * v).sum()
}

/// `sqrt(ε² + |y|²)`; with `ε = 0` this is the Euclidean norm.
pub fn gamma_eps<T: Real>(y: &[T], epsilon: T) -> T {
    (epsilon * epsilon + norm_sq(y)).sqrt()
}

fn require_positive<T: Real>(epsilon: T) -> Result<()> {
    if epsilon > T::zero() && epsilon.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "epsilon must be positive for the single-valued gradient, got {epsilon}"
        )))
    }
}

/// `y / sqrt(ε² + |y|²)`, whose norm is strictly below one.
pub fn grad_gamma_eps<T: Real>(y: &[T], epsilon: T) -> Result<Vec<T>> {
    require_positive(epsilon)?;
    let inv = T::one() / gamma_eps(y, epsilon);
    Ok(y.iter().map(|&v| v * inv).collect())
}

/// `(I (ε² + |y|²) - y ⊗ y) / (ε² + |y|²)^{3/2}`, row-major.
pub fn hess_gamma_eps<T: Real>(y: &[T], epsilon: T) -> Result<Vec<Vec<T>>> {
    require_positive(epsilon)?;
    let n = y.len();
    let s = epsilon * epsilon + norm_sq(y);
    let denom = s * s.sqrt();
    Ok((0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let id = if i == j { s } else { T::zero() };
                    (id - y[i] * y[j]) / denom
                })
                .collect()
        })
        .collect())
}

/// Fixed-size kernels for the hot loops; `dim` entries of `y` are used.
#[inline]
pub(crate) fn gamma2<T: Real>(y: [T; 2], epsilon: T) -> T {
    (epsilon * epsilon + y[0] * y[0] + y[1] * y[1]).sqrt()
}

#[inline]
pub(crate) fn grad_gamma2<T: Real>(y: [T; 2], epsilon: T) -> [T; 2] {
    let inv = T::one() / gamma2(y, epsilon);
    [y[0] * inv, y[1] * inv]
}

#[inline]
pub(crate) fn hess_gamma2<T: Real>(y: [T; 2], epsilon: T) -> [[T; 2]; 2] {
    let s = epsilon * epsilon + y[0] * y[0] + y[1] * y[1];
    let denom = s * s.sqrt();
    [
        [(s - y[0] * y[0]) / denom, -y[0] * y[1] / denom],
        [-y[1] * y[0] / denom, (s - y[1] * y[1]) / denom],
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn formula_values() {
        assert_eq!(gamma_eps(&[0.0, 0.0], 0.5), 0.5);
        assert_eq!(gamma_eps(&[3.0, 4.0], 0.0), 5.0);
        assert!((gamma_eps(&[1.0, 0.0], 1.0) - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn gradient_at_origin_vanishes_and_zero_epsilon_is_rejected() {
        assert_eq!(grad_gamma_eps(&[0.0, 0.0], 0.3).unwrap(), vec![0.0, 0.0]);
        assert!(grad_gamma_eps(&[3.0, 4.0], 0.0).is_err());
        assert!(hess_gamma_eps(&[3.0, 4.0], 0.0).is_err());
    }

    #[test]
    fn hessian_at_origin_is_scaled_identity() {
        let h = hess_gamma_eps(&[0.0, 0.0], 0.25).unwrap();
        assert_eq!(h, vec![vec![4.0, 0.0], vec![0.0, 4.0]]);
    }

    #[test]
    fn hessian_matches_central_differences() {
        let y = [0.3f64, -0.7];
        let eps = 0.5f64;
        let h = hess_gamma_eps(&y, eps).unwrap();
        let step = 1e-5;
        for j in 0..2 {
            let mut yp = y;
            let mut ym = y;
            yp[j] += step;
            ym[j] -= step;
            let gp = grad_gamma_eps(&yp, eps).unwrap();
            let gm = grad_gamma_eps(&ym, eps).unwrap();
            for i in 0..2 {
                let fd = (gp[i] - gm[i]) / (2.0 * step);
                assert!((fd - h[i][j]).abs() <= 1e-6 * h[i][j].abs().max(1e-3), "{i}{j}");
            }
        }
    }

    proptest! {
        #[test]
        fn gradient_norm_below_one(y0 in -1e3f64..1e3, y1 in -1e3f64..1e3, eps in 1e-6f64..1.0) {
            let g = grad_gamma_eps(&[y0, y1], eps).unwrap();
            prop_assert!((g[0] * g[0] + g[1] * g[1]).sqrt() <= 1.0 + 1e-12);
        }

        #[test]
        fn subgradient_inequality(a0 in -10f64..10.0, a1 in -10f64..10.0,
                                  b0 in -10f64..10.0, b1 in -10f64..10.0, eps in 1e-3f64..1.0) {
            let g = grad_gamma_eps(&[a0, a1], eps).unwrap();
            let lin = gamma_eps(&[a0, a1], eps) + g[0] * (b0 - a0) + g[1] * (b1 - a1);
            prop_assert!(gamma_eps(&[b0, b1], eps) - lin >= -1e-12);
        }

        #[test]
        fn lipschitz_in_epsilon(y0 in -10f64..10.0, e1 in 0f64..1.0, e2 in 0f64..1.0) {
            let d = (gamma_eps(&[y0], e1) - gamma_eps(&[y0], e2)).abs();
            prop_assert!(d <= (e1 - e2).abs() + 1e-15);
        }

        #[test]
        fn hessian_positive_definite(y0 in -10f64..10.0, y1 in -10f64..10.0, eps in 0.1f64..1.0) {
            let h = hess_gamma_eps(&[y0, y1], eps).unwrap();
            let tr = h[0][0] + h[1][1];
            let det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
            prop_assert!(tr > 0.0 && det > 0.0);
            prop_assert_eq!(h[0][1], h[1][0]);
        }

        #[test]
        fn fixed_size_kernels_agree(y0 in -5f64..5.0, y1 in -5f64..5.0, eps in 0.01f64..1.0) {
            prop_assert!((gamma2([y0, y1], eps) - gamma_eps(&[y0, y1], eps)).abs() < 1e-14 * gamma_eps(&[y0, y1], eps));
            let g = grad_gamma_eps(&[y0, y1], eps).unwrap();
            let g2 = grad_gamma2([y0, y1], eps);
            prop_assert!((g[0] - g2[0]).abs() < 1e-15 && (g[1] - g2[1]).abs() < 1e-15);
            let h = hess_gamma_eps(&[y0, y1], eps).unwrap();
            let h2 = hess_gamma2([y0, y1], eps);
            for i in 0..2 { for j in 0..2 { prop_assert!((h[i][j] - h2[i][j]).abs() < 1e-12 * h[i][j].abs().max(1.0)); } }
        }
    }
}
