use kwc_core::calculus::{norm_h, norm_v, ScalarField};
use kwc_core::evolution::Trajectory;

/// `sup_n |(η¹-η², θ¹-θ²)(t_n)|` over matching snapshots, in `H` and in `V`.
pub fn sup_distances(a: &Trajectory<f64>, b: &Trajectory<f64>) -> (f64, f64) {
    assert_eq!(a.snapshots.len(), b.snapshots.len(), "trajectories sampled differently");
    let mut h = 0.0f64;
    let mut v = 0.0f64;
    for (x, y) in a.snapshots.iter().zip(&b.snapshots) {
        let de = &x.eta - &y.eta;
        let dt = &x.theta - &y.theta;
        h = h.max((norm_h(&de).powi(2) + norm_h(&dt).powi(2)).sqrt());
        v = v.max((norm_v(&de).powi(2) + norm_v(&dt).powi(2)).sqrt());
    }
    (h, v)
}

pub fn v_distance(a: &ScalarField<f64>, b: &ScalarField<f64>) -> f64 {
    norm_v(&(a - b))
}

pub fn identical(a: &Trajectory<f64>, b: &Trajectory<f64>) -> bool {
    a.snapshots == b.snapshots && a.records == b.records
}
