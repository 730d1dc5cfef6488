//! Scalar abstractions shared by the exact (polynomial) calculus and the
//! floating-point numerics.

use num_traits::{Float, FromPrimitive, Num, ToPrimitive};
use std::fmt::Debug;
use std::ops::Neg;

/// A field-like scalar usable as a polynomial coefficient.
///
/// Implemented for `f32`, `f64` and `num_rational::Ratio<i64>`, so the
/// superform identities can be checked either to round-off or exactly.
pub trait Scalar:
    Clone + Debug + PartialEq + Num + Neg<Output = Self> + FromPrimitive + ToPrimitive + Send + Sync + 'static
{
    fn from_i64_lossy(v: i64) -> Self {
        Self::from_i64(v).expect("integer fits the scalar type")
    }

    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn abs_f64(&self) -> f64 {
        self.to_f64_lossy().abs()
    }
}

impl<T> Scalar for T where
    T: Clone + Debug + PartialEq + Num + Neg<Output = T> + FromPrimitive + ToPrimitive + Send + Sync + 'static
{
}

/// Floating-point scalar used by the iterative solvers.
pub trait Real: Float + FromPrimitive + Debug + Send + Sync + 'static {
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("literal representable")
    }
}

impl Real for f32 {}
impl Real for f64 {}
