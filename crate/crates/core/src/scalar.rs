//! Floating point abstraction shared by every numeric module.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Real number type the tracking pipeline is generic over.
///
/// Implemented for `f32` and `f64`. Geometry, error models, calibration and
/// the tracker state machine are all written against this trait; the crate
/// root exposes `f64` aliases for the common case.
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Converts an `f64` literal. Every `f64` is representable (possibly
    /// rounded) in the supported types, so this never fails.
    fn lit(v: f64) -> Self;

    /// Widens to `f64` for reporting.
    fn to_f64_lossy(self) -> f64;

    /// One draw from the standard normal distribution.
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// One draw from `[0, 1)`.
    fn unit_uniform<R: Rng + ?Sized>(rng: &mut R) -> Self;

    fn half() -> Self {
        Self::lit(0.5)
    }
}

macro_rules! impl_scalar {
    ($($t:ty),*) => {
        $(
            impl Scalar for $t {
                #[inline]
                fn lit(v: f64) -> Self {
                    v as $t
                }

                #[inline]
                fn to_f64_lossy(self) -> f64 {
                    self as f64
                }

                #[inline]
                fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
                    <StandardNormal as Distribution<$t>>::sample(&StandardNormal, rng)
                }

                #[inline]
                fn unit_uniform<R: Rng + ?Sized>(rng: &mut R) -> Self {
                    rng.random::<$t>()
                }
            }
        )*
    };
}

impl_scalar!(f32, f64);

/// Arithmetic mean, `None` for an empty input.
pub fn mean<T: Scalar>(values: impl IntoIterator<Item = T>) -> Option<T> {
    let mut n = 0usize;
    let mut acc = T::zero();
    for v in values {
        acc = acc + v;
        n += 1;
    }
    (n > 0).then(|| acc / T::lit(n as f64))
}
