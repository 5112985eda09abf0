//! Universal-measure time-series forecasting.
//!
//! The crate builds a forecaster in four layers:
//!
//! 1. [`measure`] — finite-alphabet probability estimation: sliding-window
//!    context counts, the per-order Krichevsky–Trofimov estimator, and the
//!    telescoping mixture over all Markov orders that is universal for
//!    stationary ergodic sources.
//! 2. [`quantize`] / [`density`] — the real-valued extension: nested binary
//!    partitions of an interval, Lebesgue normalization, and the level
//!    mixture that turns the finite-alphabet measure into a density
//!    estimate, optionally mixed over several trailing windows.
//! 3. [`forecast`] — candidate grids, argmax one-step forecasts, recursive
//!    multi-step forecasts, and the differencing transform.
//! 4. [`eval`] — rolling-origin experiments, MAE scoring against inertial or
//!    externally supplied baselines, and seeded synthetic sources.
//!
//! All numeric code is generic over the scalar type through [`num::Real`]
//! (`f32` or `f64`); the `*64` aliases below fix the working precision most
//! callers want.

pub mod density;
pub mod error;
pub mod eval;
pub mod forecast;
pub mod logp;
pub mod measure;
pub mod num;
pub mod quantize;

pub use error::{Error, Result};

/// Log-domain value at working precision.
pub type LogValue64 = logp::LogValue<f64>;
/// Interval at working precision.
pub type Interval64 = quantize::Interval<f64>;
/// Forecast configuration at working precision.
pub type ForecastConfig64 = forecast::ForecastConfig<f64>;
/// Forecast result at working precision.
pub type Forecast64 = forecast::Forecast<f64>;
/// Evaluation report at working precision.
pub type EvaluationReport64 = eval::EvaluationReport<f64>;
