//! Probabilities and densities carried as base-2 logarithms.
//!
//! Sequential measures over a few hundred symbols underflow `f64` in linear
//! space, so every intermediate probability in this crate is a [`LogValue`].
//! Products become sums; sums go through max-shifted exponentiation.

use std::cmp::Ordering;
use std::ops::{Add, Mul, MulAssign};

use crate::num::Real;

/// A non-negative quantity stored as its base-2 logarithm.
///
/// Zero is represented by negative infinity and behaves correctly under
/// products and sums.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogValue<T>(T);

impl<T: Real> LogValue<T> {
    pub fn zero() -> Self {
        LogValue(T::neg_infinity())
    }

    pub fn one() -> Self {
        LogValue(T::zero())
    }

    /// Wraps an already-computed base-2 logarithm.
    pub fn from_log2(log2: T) -> Self {
        LogValue(log2)
    }

    /// Converts a linear-space value; negative inputs are rejected by debug assert.
    pub fn from_linear(value: T) -> Self {
        debug_assert!(value >= T::zero(), "LogValue requires a non-negative input");
        LogValue(value.log2())
    }

    pub fn log2(self) -> T {
        self.0
    }

    pub fn linear(self) -> T {
        self.0.exp2()
    }

    pub fn is_zero(self) -> bool {
        self.0 == T::neg_infinity()
    }

    /// log2 of `self / other`.
    pub fn log2_ratio(self, other: Self) -> T {
        self.0 - other.0
    }

    /// Max-shifted sum of many log-domain terms.
    pub fn sum(terms: &[Self]) -> Self {
        let max = terms
            .iter()
            .map(|t| t.0)
            .fold(T::neg_infinity(), |a, b| if b > a { b } else { a });
        if max == T::neg_infinity() {
            return Self::zero();
        }
        let ln2 = T::from_f64_lossy(std::f64::consts::LN_2);
        let mut acc = T::zero();
        for t in terms {
            acc += (t.0 - max).exp2();
        }
        // log2(acc) via ln_1p on (acc - 1) keeps precision when acc is near 1
        LogValue(max + (acc - T::one()).ln_1p() / ln2)
    }
}

/// Linear-space addition (log-sum-exp).
impl<T: Real> Add for LogValue<T> {
    type Output = Self;

    fn add(self, rhs: Self) -> Self {
        Self::sum(&[self, rhs])
    }
}

/// Linear-space multiplication: logs add.
impl<T: Real> Mul for LogValue<T> {
    type Output = Self;

    #[allow(clippy::suspicious_arithmetic_impl)]
    fn mul(self, rhs: Self) -> Self {
        LogValue(self.0 + rhs.0)
    }
}

impl<T: Real> MulAssign for LogValue<T> {
    #[allow(clippy::suspicious_op_assign_impl)]
    fn mul_assign(&mut self, rhs: Self) {
        self.0 += rhs.0;
    }
}

impl<T: Real> PartialOrd for LogValue<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.0.partial_cmp(&other.0)
    }
}
