//! Numeric abstractions.
//!
//! Probability and walk code is written against [`Scalar`], which covers
//! `f32`, `f64` and exact rationals ([`Exact`]). Spectral code additionally
//! needs square roots and eigen-solvers and is written against [`Real`],
//! which only the two float types implement.

use std::fmt::Debug;

use nalgebra::RealField;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, One, Signed, ToPrimitive, Zero};

/// Arbitrary-precision rational used for exact verification runs.
pub type Exact = BigRational;

/// A field of numbers that probabilities, expectations and walk vectors can
/// be computed in.
pub trait Scalar: Num + Clone + PartialOrd + Debug + Send + Sync + 'static {
    /// Tolerance used when checking that a set of weights sums to one.
    fn tolerance() -> Self;

    /// `num / den`. `den` must be non-zero.
    fn from_ratio(num: u64, den: u64) -> Self;

    /// Conversion from a float; exact for [`Exact`].
    fn from_f64(x: f64) -> Self;

    fn to_f64(&self) -> f64;

    fn is_finite_value(&self) -> bool {
        true
    }

    fn abs_value(&self) -> Self {
        if *self < Self::zero() {
            Self::zero() - self.clone()
        } else {
            self.clone()
        }
    }

    fn from_usize(n: usize) -> Self {
        Self::from_ratio(n as u64, 1)
    }
}

impl Scalar for f64 {
    fn tolerance() -> Self {
        1e-12
    }

    fn from_ratio(num: u64, den: u64) -> Self {
        num as f64 / den as f64
    }

    fn from_f64(x: f64) -> Self {
        x
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn is_finite_value(&self) -> bool {
        self.is_finite()
    }
}

impl Scalar for f32 {
    fn tolerance() -> Self {
        1e-5
    }

    fn from_ratio(num: u64, den: u64) -> Self {
        (num as f64 / den as f64) as f32
    }

    fn from_f64(x: f64) -> Self {
        x as f32
    }

    fn to_f64(&self) -> f64 {
        *self as f64
    }

    fn is_finite_value(&self) -> bool {
        self.is_finite()
    }
}

impl Scalar for BigRational {
    fn tolerance() -> Self {
        BigRational::zero()
    }

    fn from_ratio(num: u64, den: u64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    fn from_f64(x: f64) -> Self {
        BigRational::from_float(x).expect("finite float")
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn abs_value(&self) -> Self {
        Signed::abs(self)
    }
}

/// Float types usable by the eigen-solvers.
pub trait Real: Scalar + RealField + Copy {}

impl Real for f32 {}
impl Real for f64 {}

/// Left-to-right product, starting from one.
///
/// Both bound evaluators go through this so that equal factor lists give
/// bit-identical results.
pub fn ordered_product<T: Scalar>(factors: impl IntoIterator<Item = T>) -> T {
    factors.into_iter().fold(T::one(), |acc, f| acc * f)
}

/// Left-to-right sum, starting from zero.
pub fn ordered_sum<T: Scalar>(terms: impl IntoIterator<Item = T>) -> T {
    terms.into_iter().fold(T::zero(), |acc, x| acc + x)
}

pub(crate) fn one<T: Scalar>() -> T {
    <T as One>::one()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_ratio_is_exact() {
        let third = Exact::from_ratio(1, 3);
        let sum = ordered_sum(vec![third.clone(), third.clone(), third]);
        assert_eq!(sum, Exact::one());
    }

    #[test]
    fn float_conversion_to_exact_is_lossless() {
        let x = 0.1f64;
        let q = <Exact as Scalar>::from_f64(x);
        assert_eq!(Scalar::to_f64(&q), x);
    }

    #[test]
    fn abs_value_handles_negatives() {
        assert_eq!((-2.5f64).abs_value(), 2.5);
        assert_eq!(Exact::from_ratio(0, 1).abs_value(), Exact::zero());
    }
}
