//! Floating-point scalar abstraction shared by the scoring and prediction code.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Real scalar used for scores, recalls and correlation coefficients.
///
/// Implemented for `f32` and `f64`. Counts are always integers; only ratios
/// derived from them are carried in `T`.
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// `num / den`, with the `0/0 -> 0` convention.
    fn ratio(num: u64, den: u64) -> Self {
        if den == 0 {
            Self::zero()
        } else {
            Self::from_u64(num).unwrap_or_else(Self::nan) / Self::from_u64(den).unwrap_or_else(Self::nan)
        }
    }

    fn from_count(n: u64) -> Self {
        Self::from_u64(n).unwrap_or_else(Self::nan)
    }

    fn lit(v: f64) -> Self {
        Self::from_f64(v).unwrap_or_else(Self::nan)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Harmonic mean of precision and recall; 0 when both are 0.
pub fn harmonic_mean<T: Scalar>(p: T, r: T) -> T {
    let s = p + r;
    if s == T::zero() {
        T::zero()
    } else {
        T::lit(2.0) * p * r / s
    }
}
