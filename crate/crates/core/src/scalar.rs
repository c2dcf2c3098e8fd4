use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::str::FromStr;

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

/// Floating-point type used for coordinates, demands, times and costs.
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + FromStr
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Absolute slack used when comparing an accumulated quantity against a bound.
    fn slack(bound: Self) -> Self {
        let rel = Self::from_f64(1e-9).unwrap().max(Self::epsilon() * Self::from_f64(64.0).unwrap());
        rel * bound.abs().max(Self::one())
    }

    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("literal fits the scalar type")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// `a <= b` up to [`Scalar::slack`].
pub(crate) fn within<S: Scalar>(a: S, b: S) -> bool {
    a <= b + S::slack(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slack_scales_with_bound() {
        assert!(within(100.0f64 + 1e-8, 100.0));
        assert!(!within(100.0f64 + 1e-3, 100.0));
        assert!(within(1.0f32 + 1e-6, 1.0));
    }
}
