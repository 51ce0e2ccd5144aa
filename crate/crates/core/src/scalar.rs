//! Scalar abstraction shared by the geometry, network and asymptotics code.

use std::fmt;

use nalgebra as na;
use num_traits as nt;
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating point type the analytic code is generic over (`f32` or `f64`).
///
/// Built on [`nalgebra::RealField`] so dense factorizations are available
/// without leaving the generic code path.
pub trait Real:
    na::RealField
    + Copy
    + nt::FloatConst
    + nt::ToPrimitive
    + Default
    + fmt::Display
    + Serialize
    + DeserializeOwned
{
    /// Converts an `f64` literal. Always succeeds for the two implementors.
    #[inline]
    fn lit(x: f64) -> Self {
        <Self as nt::FromPrimitive>::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn count(n: usize) -> Self {
        <Self as nt::FromPrimitive>::from_usize(n).expect("usize representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        nt::ToPrimitive::to_f64(&self).expect("finite float")
    }

    /// Magnitude. `RealField` pulls in both `Signed::abs` and
    /// `ComplexField::abs`, so generic code calls this instead.
    #[inline]
    fn mag(self) -> Self {
        <Self as na::ComplexField>::abs(self)
    }

    /// Machine epsilon of the concrete type.
    fn eps() -> Self;
}

impl Real for f32 {
    fn eps() -> Self {
        f32::EPSILON
    }
}

impl Real for f64 {
    fn eps() -> Self {
        f64::EPSILON
    }
}
