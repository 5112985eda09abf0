//! Scalar abstraction: the measure, density and forecasting code is generic
//! over any IEEE float that can supply a log-gamma.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

/// Floating-point scalar used throughout the crate: `f32` or `f64`.
pub trait Real:
    Float + FromPrimitive + ToPrimitive + NumAssign + Sum<Self> + Debug + Display + Send + Sync + 'static
{
    /// Natural log of the gamma function, defined for positive arguments.
    fn ln_gamma(self) -> Self;

    /// Lossless conversion from an occurrence count.
    fn from_count(n: u64) -> Self {
        Self::from_u64(n).expect("count representable as scalar")
    }

    fn from_f64_lossy(x: f64) -> Self {
        Self::from_f64(x).expect("f64 convertible to scalar")
    }

    fn half() -> Self {
        Self::from_f64_lossy(0.5)
    }

    /// Base-2 log of the gamma function.
    fn log2_gamma(self) -> Self {
        self.ln_gamma() / Self::from_f64_lossy(std::f64::consts::LN_2)
    }
}

impl Real for f64 {
    fn ln_gamma(self) -> f64 {
        libm::lgamma(self)
    }
}

impl Real for f32 {
    fn ln_gamma(self) -> f32 {
        libm::lgamma(self as f64) as f32
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn ln_gamma_matches_known_values() {
        // gamma(1/2) = sqrt(pi), gamma(n) = (n-1)!
        assert_relative_eq!(
            Real::ln_gamma(0.5f64),
            std::f64::consts::PI.sqrt().ln(),
            max_relative = 1e-14
        );
        assert_relative_eq!(Real::ln_gamma(1.0f64), 0.0, epsilon = 1e-14);
        assert_relative_eq!(Real::ln_gamma(5.0f64), 24.0f64.ln(), max_relative = 1e-14);
        // half-integer recurrence: gamma(n + 1/2) = (n - 1/2) gamma(n - 1/2)
        let lhs = Real::ln_gamma(7.5f64);
        let rhs = 6.5f64.ln() + Real::ln_gamma(6.5f64);
        assert_relative_eq!(lhs, rhs, max_relative = 1e-14);
    }

    #[test]
    fn f32_ln_gamma_goes_through_f64() {
        assert_relative_eq!(
            Real::ln_gamma(0.5f32),
            (std::f32::consts::PI.sqrt()).ln(),
            epsilon = 1e-6
        );
    }
}
