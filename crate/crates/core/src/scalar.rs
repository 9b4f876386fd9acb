//! Scalar abstraction shared by kernels, rewards and policies.

use std::fmt::{Debug, Display};

use num_rational::Ratio;
use num_traits::{FromPrimitive, Num, Signed, ToPrimitive};

/// Numeric type usable for probabilities and rewards.
///
/// Implemented for `f64`, `f32` and exact rationals (`Ratio<i64>`). Only the
/// zero/nonzero structure of a kernel matters for enumeration, so every scalar
/// yields the same success sets; the type only affects the drift norms and the
/// stochasticity checks.
pub trait Scalar:
    Num + Signed + FromPrimitive + ToPrimitive + Copy + PartialOrd + Debug + Display + Send + Sync + 'static
{
    /// Slack allowed when checking that a distribution sums to one.
    fn stochastic_tolerance() -> Self;

    /// Lossy conversion used by the sampler.
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// `n / d` in this scalar type.
    fn ratio(n: u32, d: u32) -> Self {
        Self::from_u32(n).expect("u32 fits") / Self::from_u32(d).expect("u32 fits")
    }
}

impl Scalar for f64 {
    fn stochastic_tolerance() -> Self {
        1e-9
    }
}

impl Scalar for f32 {
    // 1e-9 is below f32 resolution near 1.0
    fn stochastic_tolerance() -> Self {
        1e-5
    }
}

impl Scalar for Ratio<i64> {
    fn stochastic_tolerance() -> Self {
        Ratio::from_integer(0)
    }
}

/// Largest element of a sequence, or zero when empty.
pub(crate) fn sup<T: Scalar>(values: impl IntoIterator<Item = T>) -> T {
    values.into_iter().fold(T::zero(), |acc, v| if v > acc { v } else { acc })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratio_is_exact_for_rationals() {
        let third = <Ratio<i64> as Scalar>::ratio(1, 3);
        assert_eq!(third + third + third, Ratio::from_integer(1));
    }

    #[test]
    fn sup_of_empty_is_zero() {
        assert_eq!(sup::<f64>([]), 0.0);
        assert_eq!(sup([0.5, 2.0, 1.0]), 2.0);
    }
}
