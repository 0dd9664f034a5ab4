//! Scalar abstraction shared by every numerical kernel in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

/// Floating-point scalar the discretization and solvers are generic over.
///
/// Implemented for `f32` and `f64`. Tolerances derived through [`Real::tol`]
/// are clamped from below by a multiple of machine epsilon so that the same
/// code path works at single precision.
pub trait Real:
    Float + FromPrimitive + ToPrimitive + NumAssign + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    /// Converts a count.
    #[inline]
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }

    /// `max(requested, floor_ulps * epsilon)`.
    #[inline]
    fn tol(requested: f64, floor_ulps: f64) -> Self {
        let floor = floor_ulps * Self::epsilon().to_f64().unwrap_or(f64::EPSILON);
        Self::lit(requested.max(floor))
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tolerance_floor_depends_on_precision() {
        assert_eq!(<f64 as Real>::tol(1e-12, 100.0), 1e-12);
        let t32 = <f32 as Real>::tol(1e-12, 100.0);
        assert!(t32 > 1e-6 && t32 < 1e-4);
    }
}
