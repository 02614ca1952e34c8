//! Floating-point abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

/// Real scalar type used for geometry, residuals and linear algebra.
///
/// Implemented for `f32` and `f64`. Tolerances quoted throughout the crate
/// assume `f64`; `f32` instantiations are useful for the pure kernels
/// (quadrature, basis functions, Forchheimer inversion) but are too coarse
/// for finite-difference Jacobians.
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Default
    + Debug
    + Display
    + LowerExp
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal. Infallible for the implemented types.
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("literal representable")
    }

    /// Converts a count or index.
    #[inline]
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable")
    }

    #[inline]
    fn half() -> Self {
        Self::lit(0.5)
    }

    #[inline]
    fn two() -> Self {
        Self::lit(2.0)
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl<T> Scalar for T where
    T: Float
        + FromPrimitive
        + ToPrimitive
        + NumAssign
        + Sum
        + Default
        + Debug
        + Display
        + LowerExp
        + Send
        + Sync
        + 'static
{
}

/// Shorthand for [`Scalar::lit`].
#[inline]
pub fn lit<T: Scalar>(v: f64) -> T {
    T::lit(v)
}
