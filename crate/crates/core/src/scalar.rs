//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt;

use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};

/// Real floating-point scalar: `f32` or `f64`.
///
/// Everything rank-related is tolerance based, so each precision carries its
/// own default tolerance.
pub trait Scalar:
    RealField + Copy + FromPrimitive + ToPrimitive + fmt::Display + fmt::LowerExp
{
    /// Default tolerance for rank decisions and geometric matching.
    fn default_tol() -> Self;

    /// Converts an `f64` literal into this scalar type.
    #[inline]
    fn lit(x: f64) -> Self {
        nalgebra::convert(x)
    }

    /// Lossy conversion to `f64`, used for display and serialization.
    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Converts an integer (lattice coordinate, count) into this scalar type.
    #[inline]
    fn int(k: i64) -> Self {
        Self::from_i64(k).expect("integer representable as float")
    }
}

impl Scalar for f64 {
    fn default_tol() -> Self {
        1e-9
    }
}

impl Scalar for f32 {
    fn default_tol() -> Self {
        1e-4
    }
}

/// Rounds to the nearest integer, returning `None` if `x` is further than
/// `tol` from it.
pub(crate) fn nearest_integer<T: Scalar>(x: T, tol: T) -> Option<i64> {
    let r = x.round();
    if (x - r).abs() <= tol {
        r.to_i64()
    } else {
        None
    }
}
