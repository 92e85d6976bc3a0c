//! Scalar types used for ratios reported by the metrics.
//!
//! Every ratio in this crate is a quotient of two counts, so a scalar only
//! needs to be constructible from a pair of integers. Floats give the usual
//! approximate values; [`num_rational::Ratio`] gives exact ones, which the
//! tests use to pin values such as a conflict rate of exactly 2/5.

use std::fmt::Debug;

use num_rational::Ratio;
use num_traits::{Num, ToPrimitive};

pub trait Scalar: Num + Copy + PartialOrd + Debug {
    /// `num / den`. Callers guarantee `den > 0`.
    fn from_ratio(num: u64, den: u64) -> Self;

    fn from_count(n: u64) -> Self {
        Self::from_ratio(n, 1)
    }

    fn to_f64(self) -> f64;
}

impl Scalar for f64 {
    fn from_ratio(num: u64, den: u64) -> Self {
        num as f64 / den as f64
    }

    fn to_f64(self) -> f64 {
        self
    }
}

impl Scalar for f32 {
    fn from_ratio(num: u64, den: u64) -> Self {
        (num as f64 / den as f64) as f32
    }

    fn to_f64(self) -> f64 {
        self as f64
    }
}

impl Scalar for Ratio<u64> {
    fn from_ratio(num: u64, den: u64) -> Self {
        Ratio::new(num, den)
    }

    fn to_f64(self) -> f64 {
        ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }
}

impl Scalar for Ratio<u128> {
    fn from_ratio(num: u64, den: u64) -> Self {
        Ratio::new(num as u128, den as u128)
    }

    fn to_f64(self) -> f64 {
        *self.numer() as f64 / *self.denom() as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_and_float_agree() {
        let exact = <Ratio<u64> as Scalar>::from_ratio(2, 5);
        assert_eq!(exact, Ratio::new(2, 5));
        assert_eq!(Scalar::to_f64(exact), 0.4);
        assert_eq!(<f64 as Scalar>::from_ratio(2, 5), 0.4);
        assert!((<f32 as Scalar>::from_ratio(1, 3) - 1.0 / 3.0).abs() < 1e-6);
    }
}
