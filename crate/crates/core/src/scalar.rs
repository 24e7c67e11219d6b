//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating-point type the reliability math is written against (`f32` or `f64`).
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Debug
    + Display
    + LowerExp
    + Default
    + Sum
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Send
    + Sync
    + 'static
{
    /// Slack allowed when accepting a computed probability mass function:
    /// entries may stray this far outside `[0, 1]` and the total this far
    /// from one before the result is treated as a numerical breakdown.
    fn mass_tolerance() -> Self;

    /// Converts an `f64` literal. Panics only for values the type cannot
    /// represent at all, which never happens for the constants used here.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f64 {
    fn mass_tolerance() -> Self {
        1e-9
    }
}

impl Real for f32 {
    // Alternating sums lose roughly three decimal digits at desk scale.
    fn mass_tolerance() -> Self {
        2e-4
    }
}
