use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// The tuple `(g, G, α, α', α'', α₀, α₀')` driving the system.
pub trait ModelFunctions<T: Real>: Send + Sync {
    /// Lipschitz perturbation in the η-equation.
    fn g(&self, r: T) -> T;
    /// Nonnegative primitive of `g`.
    fn potential(&self, r: T) -> T;
    fn alpha(&self, r: T) -> T;
    fn alpha_d1(&self, r: T) -> T;
    fn alpha_d2(&self, r: T) -> T;
    /// Mobility multiplying `∂_t θ`.
    fn alpha0(&self, r: T) -> T;
    fn alpha0_d1(&self, r: T) -> T;

    fn name(&self) -> &str {
        "custom"
    }
}

/// Reference model with analytically known bounds:
///
/// * `g(r) = r - 1`, `G(r) = (r - 1)² / 2`
/// * `α(r) = a + sqrt(0.01 + r²)` with `a = alpha_offset`
/// * `α₀(r) = b + c / (1 + r²)` with `b = alpha0_offset`, `c = alpha0_bump`
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReferenceModel<T> {
    pub alpha_offset: T,
    pub alpha0_offset: T,
    pub alpha0_bump: T,
}

impl<T: Real> Default for ReferenceModel<T> {
    fn default() -> Self {
        Self { alpha_offset: T::lit(0.1), alpha0_offset: T::one(), alpha0_bump: T::one() }
    }
}

impl<T: Real> ModelFunctions<T> for ReferenceModel<T> {
    fn g(&self, r: T) -> T {
        r - T::one()
    }
    fn potential(&self, r: T) -> T {
        let d = r - T::one();
        T::lit(0.5) * d * d
    }
    fn alpha(&self, r: T) -> T {
        self.alpha_offset + (T::lit(0.01) + r * r).sqrt()
    }
    fn alpha_d1(&self, r: T) -> T {
        r / (T::lit(0.01) + r * r).sqrt()
    }
    fn alpha_d2(&self, r: T) -> T {
        let s = T::lit(0.01) + r * r;
        T::lit(0.01) / (s * s.sqrt())
    }
    fn alpha0(&self, r: T) -> T {
        self.alpha0_offset + self.alpha0_bump / (T::one() + r * r)
    }
    fn alpha0_d1(&self, r: T) -> T {
        let s = T::one() + r * r;
        -T::lit(2.0) * self.alpha0_bump * r / (s * s)
    }
    fn name(&self) -> &str {
        "reference"
    }
}

type ScalarMap<T> = Arc<dyn Fn(T) -> T + Send + Sync>;

/// Model assembled from user callables.
#[derive(Clone)]
pub struct ClosureModel<T> {
    pub g: ScalarMap<T>,
    pub potential: ScalarMap<T>,
    pub alpha: ScalarMap<T>,
    pub alpha_d1: ScalarMap<T>,
    pub alpha_d2: ScalarMap<T>,
    pub alpha0: ScalarMap<T>,
    pub alpha0_d1: ScalarMap<T>,
}

impl<T: Real> ClosureModel<T> {
    /// Closures reproducing [`ReferenceModel::default`], to be overridden piecewise.
    pub fn reference() -> Self {
        let m = ReferenceModel::<T>::default();
        Self {
            g: Arc::new(move |r| m.g(r)),
            potential: Arc::new(move |r| m.potential(r)),
            alpha: Arc::new(move |r| m.alpha(r)),
            alpha_d1: Arc::new(move |r| m.alpha_d1(r)),
            alpha_d2: Arc::new(move |r| m.alpha_d2(r)),
            alpha0: Arc::new(move |r| m.alpha0(r)),
            alpha0_d1: Arc::new(move |r| m.alpha0_d1(r)),
        }
    }
}

impl<T: Real> ModelFunctions<T> for ClosureModel<T> {
    fn g(&self, r: T) -> T {
        (self.g)(r)
    }
    fn potential(&self, r: T) -> T {
        (self.potential)(r)
    }
    fn alpha(&self, r: T) -> T {
        (self.alpha)(r)
    }
    fn alpha_d1(&self, r: T) -> T {
        (self.alpha_d1)(r)
    }
    fn alpha_d2(&self, r: T) -> T {
        (self.alpha_d2)(r)
    }
    fn alpha0(&self, r: T) -> T {
        (self.alpha0)(r)
    }
    fn alpha0_d1(&self, r: T) -> T {
        (self.alpha0_d1)(r)
    }
}

/// Model selection as it appears in a run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    #[serde(default = "ModelSpec::default_name")]
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_offset: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha0_offset: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha0_bump: Option<f64>,
}

impl Default for ModelSpec {
    fn default() -> Self {
        Self { name: Self::default_name(), alpha_offset: None, alpha0_offset: None, alpha0_bump: None }
    }
}

impl ModelSpec {
    fn default_name() -> String {
        "reference".to_string()
    }

    pub fn build<T: Real>(&self) -> Result<ReferenceModel<T>> {
        if self.name != "reference" {
            return Err(Error::InvalidArgument(format!("unknown model `{}` (known: reference)", self.name)));
        }
        let mut m = ReferenceModel::<T>::default();
        if let Some(v) = self.alpha_offset {
            m.alpha_offset = T::lit(v);
        }
        if let Some(v) = self.alpha0_offset {
            m.alpha0_offset = T::lit(v);
        }
        if let Some(v) = self.alpha0_bump {
            m.alpha0_bump = T::lit(v);
        }
        Ok(m)
    }
}

/// Sampled sup-norms and the mobility infimum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelBounds<T> {
    pub g_d1_sup: T,
    pub alpha_d1_sup: T,
    pub alpha_d2_sup: T,
    pub alpha0_sup: T,
    pub alpha0_d1_sup: T,
    /// `inf α₀` over the sampled range.
    pub delta_alpha: T,
    pub range: (T, T),
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionCheck {
    pub assumption: String,
    pub description: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionReport<T> {
    pub checks: Vec<AssumptionCheck>,
    pub bounds: ModelBounds<T>,
    pub warnings: Vec<String>,
}

impl<T: Real> AssumptionReport<T> {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failed(&self) -> impl Iterator<Item = &AssumptionCheck> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

/// Default sampling window `[-10, 10]`.
pub const DEFAULT_SAMPLE_RANGE: (f64, f64) = (-10.0, 10.0);
pub const DEFAULT_SAMPLES: usize = 100_000;

/// Samples the model on `range` and checks the structural assumptions:
/// `G ≥ 0`, `G' = g`, `α'' ≥ 0` and `inf α₀ > 0`.
pub fn validate_assumptions<T: Real, M: ModelFunctions<T> + ?Sized>(
    model: &M,
    range: (T, T),
    n_samples: usize,
) -> Result<AssumptionReport<T>> {
    let (lo, hi) = range;
    if !(hi > lo) || n_samples < 2 {
        return Err(Error::InvalidArgument("sample range must be nonempty with at least 2 samples".into()));
    }
    let fd_rel = T::tol(1e-6, 1e4);
    let convex_slack = T::tol(1e-12, 1e3);
    let mut min_g_prim = T::infinity();
    let mut worst_fd = T::zero();
    let mut worst_fd_at = lo;
    let mut min_alpha_d2 = T::infinity();
    let mut b = ModelBounds {
        g_d1_sup: T::zero(),
        alpha_d1_sup: T::zero(),
        alpha_d2_sup: T::zero(),
        alpha0_sup: T::zero(),
        alpha0_d1_sup: T::zero(),
        delta_alpha: T::infinity(),
        range,
        samples: n_samples,
    };
    let mid = T::lit(0.5) * (lo + hi);
    let quarter = T::lit(0.25) * (hi - lo);
    let mut inner_alpha_d1 = T::zero();
    let denom = T::from_count(n_samples - 1);
    let mut non_finite = false;
    for k in 0..n_samples {
        let r = lo + (hi - lo) * T::from_count(k) / denom;
        let h = T::lit(1e-4) * T::one().max(r.abs());
        let gp = model.potential(r);
        let gv = model.g(r);
        let fd = (model.potential(r + h) - model.potential(r - h)) / (T::lit(2.0) * h);
        let rel = (fd - gv).abs() / T::one().max(gv.abs());
        if rel > worst_fd {
            worst_fd = rel;
            worst_fd_at = r;
        }
        min_g_prim = min_g_prim.min(gp);
        let g_d1 = (model.g(r + h) - model.g(r - h)) / (T::lit(2.0) * h);
        let a1 = model.alpha_d1(r).abs();
        let a2 = model.alpha_d2(r);
        let a0 = model.alpha0(r);
        let a01 = model.alpha0_d1(r).abs();
        for v in [gp, gv, g_d1, a1, a2, a0, a01] {
            non_finite |= !v.is_finite();
        }
        b.g_d1_sup = b.g_d1_sup.max(g_d1.abs());
        b.alpha_d1_sup = b.alpha_d1_sup.max(a1);
        b.alpha_d2_sup = b.alpha_d2_sup.max(a2.abs());
        b.alpha0_sup = b.alpha0_sup.max(a0.abs());
        b.alpha0_d1_sup = b.alpha0_d1_sup.max(a01);
        b.delta_alpha = b.delta_alpha.min(a0);
        min_alpha_d2 = min_alpha_d2.min(a2);
        if (r - mid).abs() <= quarter {
            inner_alpha_d1 = inner_alpha_d1.max(a1);
        }
    }
    let checks = vec![
        AssumptionCheck {
            assumption: "A2".into(),
            description: "G >= 0".into(),
            passed: min_g_prim >= T::zero(),
            detail: format!("min G = {min_g_prim}"),
        },
        AssumptionCheck {
            assumption: "A2".into(),
            description: "G' = g".into(),
            passed: worst_fd <= fd_rel,
            detail: format!("worst relative mismatch {worst_fd} at r = {worst_fd_at}"),
        },
        AssumptionCheck {
            assumption: "A3".into(),
            description: "alpha convex".into(),
            passed: min_alpha_d2 >= -convex_slack,
            detail: format!("min alpha'' = {min_alpha_d2}"),
        },
        AssumptionCheck {
            assumption: "A3".into(),
            description: "inf alpha0 > 0".into(),
            passed: b.delta_alpha > T::zero(),
            detail: format!("delta_alpha = {}", b.delta_alpha),
        },
        AssumptionCheck {
            assumption: "A2-A3".into(),
            description: "model values finite".into(),
            passed: !non_finite,
            detail: if non_finite { "non-finite sample".into() } else { "ok".into() },
        },
    ];
    let mut warnings = Vec::new();
    if b.alpha_d1_sup > T::lit(1.01) * inner_alpha_d1 {
        warnings.push(format!(
            "sup |alpha'| grows with the sample range ({} on the central half, {} overall); a bounded alpha' is assumed",
            inner_alpha_d1, b.alpha_d1_sup
        ));
    }
    Ok(AssumptionReport { checks, bounds: b, warnings })
}
