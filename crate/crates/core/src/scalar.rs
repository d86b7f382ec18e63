//! Scalar abstraction: the numeric type scores are computed in.

use std::fmt::{Debug, Display};
use std::str::FromStr;

use num_traits::{Float, FromPrimitive, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating-point scalar usable for scores and feature values.
///
/// Everything in this crate is generic over `Scalar`; the CLI and the
/// bundled fixtures use [`f64`](crate::Score).
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + FromStr
    + Display
    + Debug
    + Serialize
    + DeserializeOwned
    + Send
    + Sync
    + 'static
{
    /// Bit-level equality. Unlike `==` this distinguishes `-0.0` from `0.0`.
    fn bit_eq(self, other: Self) -> bool;
}

impl Scalar for f32 {
    fn bit_eq(self, other: Self) -> bool {
        self.to_bits() == other.to_bits()
    }
}

impl Scalar for f64 {
    fn bit_eq(self, other: Self) -> bool {
        self.to_bits() == other.to_bits()
    }
}

/// Sum of an iterator of scalars (avoids the `Sum` bound on `Scalar`).
pub(crate) fn sum<S: Scalar>(values: impl Iterator<Item = S>) -> S {
    values.fold(S::zero(), |acc, v| acc + v)
}

/// Arithmetic mean; `None` on an empty slice.
pub(crate) fn mean<S: Scalar>(values: &[S]) -> Option<S> {
    if values.is_empty() {
        return None;
    }
    let n = S::from_usize(values.len()).expect("count representable");
    Some(sum(values.iter().copied()) / n)
}

/// Population standard deviation; `None` on an empty slice.
pub(crate) fn population_std_dev<S: Scalar>(values: &[S]) -> Option<S> {
    let mu = mean(values)?;
    let n = S::from_usize(values.len()).expect("count representable");
    let var = sum(values.iter().map(|&v| (v - mu) * (v - mu))) / n;
    Some(var.sqrt())
}
