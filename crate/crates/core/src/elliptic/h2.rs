use crate::calculus::{norm_h, norm_h2, norm_v, ScalarField};
use crate::scalar::Real;

/// `|w|²_{H²} / (|z|²_H + |β|²_V)` with the `-Δ_N + I` surrogate for the `H²` norm.
///
/// For `w` solving the singular resolvent problem with `m ≡ 1` this ratio is
/// bounded independently of `ε`.
pub fn check_h2_bound<T: Real>(w: &ScalarField<T>, z: &ScalarField<T>, beta: &ScalarField<T>) -> T {
    let num = norm_h2(w);
    let zh = norm_h(z);
    let bv = norm_v(beta);
    num * num / (zh * zh + bv * bv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::Grid;

    #[test]
    fn constant_case_is_one() {
        let g = Grid::<f64>::unit_1d(16).unwrap();
        let c = ScalarField::constant(g, 2.5);
        let r = check_h2_bound(&c, &c, &ScalarField::zeros(g));
        assert!((r - 1.0).abs() < 1e-14);
    }

    #[test]
    fn positive_for_nonzero_input() {
        let g = Grid::<f64>::unit_1d(16).unwrap();
        let w = ScalarField::from_fn(g, |x| x[0]);
        assert!(check_h2_bound(&w, &w, &w) > 0.0);
    }
}
