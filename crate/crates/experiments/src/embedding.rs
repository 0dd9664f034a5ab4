use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use kwc_core::calculus::{norm_v, Grid, ScalarField};
use kwc_core::evolution::InitialProfile;
use kwc_core::Result;

pub const EMBEDDING_SAFETY_FACTOR: f64 = 1.5;

/// Sampled size of the discrete embedding `V ⊂ L⁴`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingEstimate {
    /// Largest observed `|f|_{L⁴} / |f|_V`.
    pub lower_bound: f64,
    /// `lower_bound * safety_factor`, used as `C_V^{L⁴}`.
    pub c_v_l4: f64,
    pub safety_factor: f64,
    pub samples: usize,
}

fn norm_l4(f: &ScalarField<f64>) -> f64 {
    (f.values().iter().map(|v| v.powi(4)).sum::<f64>() * f.grid().cell_volume()).powf(0.25)
}

fn ratio(f: &ScalarField<f64>) -> f64 {
    let v = norm_v(f);
    if v > 0.0 {
        norm_l4(f) / v
    } else {
        0.0
    }
}

/// Maximizes `|f|_{L⁴}/|f|_V` over random smooth fields, constants and
/// Gaussian bumps centered at corners, edges and the middle of the domain.
pub fn estimate_embedding_constant(grid: &Grid<f64>, n_samples: usize, seed: u64) -> Result<EmbeddingEstimate> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = ratio(&ScalarField::constant(*grid, 1.0));
    let ext = grid.extents();
    let d = grid.dim();
    let mut count = 1;
    let anchors: Vec<[f64; 2]> = {
        let mut a = Vec::new();
        for fx in [0.0, 0.5, 1.0] {
            for fy in [0.0, 0.5, 1.0] {
                a.push([fx * ext[0], if d == 2 { fy * ext[1] } else { 0.0 }]);
            }
        }
        a
    };
    let diam = ext[..d].iter().map(|e| e * e).sum::<f64>().sqrt();
    for k in 0..40 {
        let width = diam * 2f64.powf(-(k as f64) / 4.0);
        for c in &anchors {
            for offset in [0.0, 0.5, 1.0, 2.0] {
                let f = ScalarField::from_fn(*grid, |x| {
                    let r2: f64 = (0..d).map(|a| (x[a] - c[a]).powi(2)).sum();
                    offset + (-r2 / (width * width)).exp()
                });
                best = best.max(ratio(&f));
                count += 1;
            }
        }
    }
    while count < n_samples {
        let profile = InitialProfile::RandomSmooth {
            mean: rng.gen_range(-2.0..2.0),
            amplitude: rng.gen_range(0.1..4.0),
            max_mode: rng.gen_range(1..=8),
            seed: rng.gen(),
        };
        best = best.max(ratio(&profile.sample(grid)?));
        count += 1;
    }
    Ok(EmbeddingEstimate {
        lower_bound: best,
        c_v_l4: best * EMBEDDING_SAFETY_FACTOR,
        safety_factor: EMBEDDING_SAFETY_FACTOR,
        samples: count,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_has_unit_ratio() {
        let g = Grid::<f64>::unit_1d(32).unwrap();
        assert!((ratio(&ScalarField::constant(g, 3.0)) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn estimate_is_at_least_one_on_unit_domain() {
        for g in [Grid::<f64>::unit_1d(32).unwrap(), Grid::unit_2d(16).unwrap()] {
            let e = estimate_embedding_constant(&g, 1000, 3).unwrap();
            assert!(e.lower_bound >= 1.0);
            assert_eq!(e.c_v_l4, 1.5 * e.lower_bound);
        }
    }
}
