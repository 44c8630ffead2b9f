//! Scalar abstraction for the numeric core.
//!
//! All score algebra (similarity, bucketing, calibration, evaluation
//! statistics) is written against [`Real`] so it works for `f32` and `f64`
//! alike. The pipeline layers instantiate everything at `f64`; see the
//! aliases at the crate root.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating-point scalar usable throughout the numeric core.
pub trait Real:
    Float
    + FromPrimitive
    + ToPrimitive
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Lossless-as-possible conversion from `f64` (used for constants).
    fn from_f64_const(v: f64) -> Self {
        Self::from_f64(v).expect("finite f64 constant must convert")
    }

    /// Widening conversion used when a statistic is reported as `f64`.
    fn as_f64(self) -> f64 {
        self.to_f64().expect("Real scalar must convert to f64")
    }
}

impl Real for f32 {}
impl Real for f64 {}

#[cfg(test)]
mod tests {
    use super::*;

    fn midrange<T: Real>(lo: T, hi: T) -> T {
        (lo + hi) / T::from_f64_const(2.0)
    }

    #[test]
    fn generic_arithmetic_works_for_both_widths() {
        assert_eq!(midrange(0.0f64, 1.0f64), 0.5);
        assert_eq!(midrange(0.0f32, 1.0f32), 0.5);
    }
}
