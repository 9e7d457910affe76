//! Floating point scalar abstraction shared by every numeric module.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Real scalar used for coordinates, distances and (continuous) time.
///
/// Implemented for `f32` and `f64`. The associated tolerances are
/// precision dependent: `f32` cannot resolve a 1e-6 inflation on times
/// around 100, so it uses a coarser one.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Inflation applied to both ends of every unsafe interval.
    const TIME_EPS: f64;
    /// Slack used by the validator when comparing against `2r`.
    const CHECK_EPS: f64;

    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("finite literal")
    }

    #[inline]
    fn eps() -> Self {
        Self::lit(Self::TIME_EPS)
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    #[inline]
    fn two() -> Self {
        Self::one() + Self::one()
    }

    #[inline]
    fn half() -> Self {
        Self::lit(0.5)
    }
}

impl Scalar for f64 {
    const TIME_EPS: f64 = 1e-6;
    const CHECK_EPS: f64 = 1e-9;
}

impl Scalar for f32 {
    const TIME_EPS: f64 = 1e-4;
    const CHECK_EPS: f64 = 1e-5;
}

/// Total order on scalars for heaps and sorting. NaN never reaches the
/// planner, so it sorts as equal.
#[inline]
pub(crate) fn cmp<S: Scalar>(a: S, b: S) -> std::cmp::Ordering {
    a.partial_cmp(&b).unwrap_or(std::cmp::Ordering::Equal)
}
