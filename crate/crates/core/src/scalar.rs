//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive};

/// Floating point scalar used for probabilities and payoff values: `f32` or `f64`.
pub trait Scalar:
    Float + FromPrimitive + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal or tolerance into this scalar type.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    /// Absolute tolerance used when checking that branch probabilities sum to one.
    ///
    /// `1e-12` for `f64`; widened to a few ulps for coarser types.
    fn prob_sum_tol() -> Self {
        Self::lit(1e-12).max(Self::epsilon() * Self::lit(16.0))
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prob_sum_tolerance_per_type() {
        assert_eq!(f64::prob_sum_tol(), 1e-12);
        assert!(f32::prob_sum_tol() > 1e-7);
    }
}
