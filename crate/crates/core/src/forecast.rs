//! Point forecasts from conditional densities.
//!
//! A candidate grid spans the interval; every candidate is scored by its
//! conditional density given the history (window-mixed when configured) and
//! the argmax is the forecast. Multi-step forecasts feed each point forecast
//! back into the working series. An optional first-difference transform runs
//! the whole scheme on increments and adds the predicted increment back onto
//! the last observed value.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::density::{DensityConfig, DensityEvaluator, RealSeries, WindowSpec, WindowedEvaluator};
use crate::error::{Error, Result};
use crate::logp::LogValue;
use crate::num::Real;
use crate::quantize::Interval;

/// Preparatory transform applied to the series before forecasting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Transform {
    None,
    Difference,
}

/// Forecasting configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastConfig<T> {
    /// Candidate spacing; interpreted on the normalized `[0; 1]` scale when
    /// `normalize` is on, in original units otherwise.
    pub grid_step: T,
    /// Trailing-window sizes for the adaptive mode; `None` scores the full
    /// history as a single sample.
    pub windows: Option<WindowSpec>,
    pub density: DensityConfig,
    pub transform: Transform,
    /// Map the working series affinely onto `[0; 1]` before quantizing.
    pub normalize: bool,
    /// Interval override; derived from the data (padded 5% per side) when
    /// absent. Ignored under the difference transform, whose grid always
    /// spans the observed increments.
    pub interval: Option<Interval<T>>,
}

impl<T: Real> Default for ForecastConfig<T> {
    fn default() -> Self {
        ForecastConfig {
            grid_step: T::from_f64_lossy(0.01),
            windows: None,
            density: DensityConfig::default(),
            transform: Transform::None,
            normalize: true,
            interval: None,
        }
    }
}

/// One-step forecast: the chosen point plus per-candidate diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forecast<T> {
    /// Argmax candidate, mapped back to original units.
    pub point: T,
    /// Every grid candidate (original units) with its conditional density
    /// (per original unit of the working scale).
    pub scores: Vec<(T, T)>,
    /// Set when several candidates shared the maximal score and the
    /// deterministic tie-break picked among them.
    pub ties_broken: bool,
    /// Deepest partition level used.
    pub finest_level: u32,
    /// Width of a finest-level bin in original units of the working series.
    pub finest_bin_width: T,
    /// Set when the automatic refinement hit the level cap before separating
    /// all distinct points.
    pub resolution_capped: bool,
}

/// The ordered candidate set `lo, lo+step, lo+2*step, ..., hi`; the upper
/// endpoint is appended when the lattice misses it.
pub fn candidate_grid<T: Real>(interval: Interval<T>, step: T) -> Result<Vec<T>> {
    if !(step > T::zero() && step.is_finite()) {
        return Err(Error::BadGridStep);
    }
    let mut grid = Vec::new();
    let mut i = 0u64;
    loop {
        let candidate = interval.lo() + T::from_count(i) * step;
        if candidate >= interval.hi() {
            break;
        }
        grid.push(candidate);
        i += 1;
    }
    grid.push(interval.hi());
    Ok(grid)
}

/// First differences `x[i+1] - x[i]`; length shrinks by one.
pub fn difference<T: Real>(series: &[T]) -> Result<Vec<T>> {
    if series.len() < 2 {
        return Err(Error::InsufficientHistory {
            need: 2,
            got: series.len(),
        });
    }
    Ok(series.windows(2).map(|w| w[1] - w[0]).collect())
}

/// Inverse of the difference transform for a single predicted increment.
pub fn undifference<T: Real>(last_value: T, predicted_diff: T) -> T {
    last_value + predicted_diff
}

enum Scorer<T: Real> {
    Plain(DensityEvaluator<T>),
    Windowed(WindowedEvaluator<T>),
}

impl<T: Real> Scorer<T> {
    fn conditional_log(&self, candidate: T) -> Result<LogValue<T>> {
        match self {
            Scorer::Plain(eval) => eval.conditional_log(candidate),
            Scorer::Windowed(eval) => eval.conditional_log(candidate),
        }
    }

    fn finest_level(&self) -> u32 {
        match self {
            Scorer::Plain(eval) => eval.finest_level(),
            Scorer::Windowed(eval) => eval.finest_level(),
        }
    }

    fn resolution_capped(&self) -> bool {
        match self {
            Scorer::Plain(eval) => eval.resolution_capped(),
            Scorer::Windowed(eval) => eval.resolution_capped(),
        }
    }
}

/// One-step-ahead forecast of the next series value.
pub fn forecast_one<T: Real>(series: &[T], cfg: &ForecastConfig<T>) -> Result<Forecast<T>> {
    let work: Vec<T> = match cfg.transform {
        Transform::None => series.to_vec(),
        Transform::Difference => difference(series)?,
    };
    if work.len() < 2 {
        return Err(Error::InsufficientHistory {
            need: 2 + if cfg.transform == Transform::Difference { 1 } else { 0 },
            got: series.len(),
        });
    }
    if let Some(spec) = &cfg.windows {
        spec.sorted_sizes(work.len())?;
    }

    let units = match (cfg.transform, cfg.interval) {
        (Transform::None, Some(interval)) => {
            for &v in &work {
                interval.check(v)?;
            }
            interval
        }
        _ => Interval::containing(&work, T::from_f64_lossy(0.05))?,
    };

    let (values, score_interval): (Vec<T>, Interval<T>) = if cfg.normalize {
        (work.iter().map(|&v| units.normalize(v)).collect(), Interval::unit())
    } else {
        (work.clone(), units)
    };

    if !(cfg.grid_step < score_interval.width()) {
        return Err(Error::BadGridStep);
    }
    let grid = candidate_grid(score_interval, cfg.grid_step)?;
    let history = RealSeries::new(values, score_interval)?;
    let scorer = match &cfg.windows {
        None => Scorer::Plain(DensityEvaluator::new(&history, &cfg.density, &grid)?),
        Some(spec) => Scorer::Windowed(WindowedEvaluator::new(&history, spec, &cfg.density, &grid)?),
    };

    let scores: Vec<LogValue<T>> = grid
        .par_iter()
        .map(|&c| scorer.conditional_log(c))
        .collect::<Result<_>>()?;

    // argmax; among exact ties prefer the candidate nearest the last observed
    // value, then the smaller candidate
    let last = *history.values().last().expect("validated non-empty");
    let best_score = scores
        .iter()
        .cloned()
        .fold(LogValue::zero(), |a, b| if b > a { b } else { a });
    let tied: Vec<usize> = (0..grid.len()).filter(|&i| scores[i] == best_score).collect();
    let chosen = *tied
        .iter()
        .min_by(|&&a, &&b| {
            let da = (grid[a] - last).abs();
            let db = (grid[b] - last).abs();
            da.partial_cmp(&db)
                .expect("grid distances are finite")
                .then(grid[a].partial_cmp(&grid[b]).expect("grid is finite"))
        })
        .expect("grid is non-empty");
    let ties_broken = tied.len() > 1;

    let to_units = |c: T| if cfg.normalize { units.denormalize(c) } else { c };
    // densities are computed on the working scale; rescale to per-unit
    let density_scale = if cfg.normalize { units.width().recip() } else { T::one() };
    let shift = match cfg.transform {
        Transform::None => T::zero(),
        Transform::Difference => *series.last().expect("series non-empty"),
    };

    let scores_out: Vec<(T, T)> = grid
        .iter()
        .zip(&scores)
        .map(|(&c, &s)| (shift + to_units(c), s.linear() * density_scale))
        .collect();
    let finest_level = scorer.finest_level();
    Ok(Forecast {
        point: shift + to_units(grid[chosen]),
        scores: scores_out,
        ties_broken,
        finest_level,
        finest_bin_width: units.width() / T::from_count(1u64 << finest_level),
        resolution_capped: scorer.resolution_capped(),
    })
}

/// Recursive multi-step forecast: each step's point forecast is appended to
/// the working series before the next step. With windows configured the
/// working series slides, dropping its oldest value each step, so every
/// window keeps its meaning.
pub fn forecast_multi<T: Real>(
    series: &[T],
    horizon: usize,
    cfg: &ForecastConfig<T>,
) -> Result<Vec<T>> {
    let mut work = series.to_vec();
    let mut out = Vec::with_capacity(horizon);
    let slide = cfg.windows.is_some();
    let fixed_len = work.len();
    for _ in 0..horizon {
        let fc = forecast_one(&work, cfg)?;
        out.push(fc.point);
        work.push(fc.point);
        if slide {
            work.remove(0);
            debug_assert_eq!(work.len(), fixed_len);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn grid_on_exact_lattice() {
        let g = candidate_grid(Interval::new(0.0, 1.0).unwrap(), 0.5).unwrap();
        assert_eq!(g, vec![0.0, 0.5, 1.0]);
    }

    #[test]
    fn grid_appends_off_lattice_endpoint() {
        let g = candidate_grid(Interval::new(0.0, 1.0).unwrap(), 0.4).unwrap();
        assert_eq!(g.len(), 4);
        assert_eq!(g[0], 0.0);
        assert_relative_eq!(g[1], 0.4);
        assert_relative_eq!(g[2], 0.8);
        assert_eq!(g[3], 1.0);
    }

    #[test]
    fn grid_of_two_endpoints() {
        let g = candidate_grid(Interval::new(0.0, 0.01).unwrap(), 0.01).unwrap();
        assert_eq!(g, vec![0.0, 0.01]);
    }

    #[test]
    fn grid_rejects_bad_steps() {
        let unit = Interval::new(0.0, 1.0).unwrap();
        assert!(candidate_grid(unit, 0.0).is_err());
        assert!(candidate_grid(unit, -0.1).is_err());
        // a step at least as wide as the interval degenerates to the endpoints
        assert_eq!(candidate_grid(unit, 1.5).unwrap(), vec![0.0, 1.0]);
        // but the forecaster requires the step to fit the interval
        let cfg = ForecastConfig {
            grid_step: 1.5,
            ..Default::default()
        };
        assert!(matches!(
            forecast_one(&[0.2, 0.8, 0.4], &cfg),
            Err(Error::BadGridStep)
        ));
    }

    #[test]
    fn difference_examples() {
        assert_eq!(difference(&[3.0, 5.0, 4.0]).unwrap(), vec![2.0, -1.0]);
        assert_eq!(undifference(4.0, 1.0), 5.0);
        assert!(difference(&[1.0]).is_err());
    }

    #[test]
    fn difference_round_trip() {
        let series = [3.5, -1.0, 0.25, 7.75, 7.75, 2.0];
        let diffs = difference(&series).unwrap();
        let mut rebuilt = vec![series[0]];
        for d in diffs {
            let next = undifference(*rebuilt.last().unwrap(), d);
            rebuilt.push(next);
        }
        assert_eq!(rebuilt.to_vec(), series.to_vec());
    }

    #[test]
    fn constant_series_forecasts_its_own_value() {
        let series = vec![0.42; 100];
        let fc = forecast_one(&series, &ForecastConfig::default()).unwrap();
        assert_abs_diff_eq!(fc.point, 0.42, epsilon = 1e-9);
        // the point is one of the reported candidates
        assert!(fc.scores.iter().any(|&(c, _)| c == fc.point));
    }

    #[test]
    fn periodic_series_forecasts_the_next_phase() {
        let series: Vec<f64> = (0..60).map(|i| [1.0, 2.0, 3.0][i % 3]).collect();
        let cfg = ForecastConfig {
            interval: Some(Interval::new(0.0, 4.0).unwrap()),
            ..Default::default()
        };
        let fc = forecast_one(&series, &cfg).unwrap();
        assert!(
            (fc.point - 1.0).abs() <= fc.finest_bin_width,
            "point {} width {}",
            fc.point,
            fc.finest_bin_width
        );
    }

    #[test]
    fn too_short_history_is_rejected() {
        let cfg = ForecastConfig::<f64>::default();
        assert!(matches!(
            forecast_one(&[], &cfg),
            Err(Error::InsufficientHistory { .. })
        ));
        assert!(forecast_one(&[1.0], &cfg).is_err());
    }

    #[test]
    fn horizon_one_equals_single_step() {
        let series: Vec<f64> = (0..30).map(|i| ((i * 13) % 7) as f64).collect();
        let one = forecast_one(&series, &ForecastConfig::default()).unwrap();
        let multi = forecast_multi(&series, 1, &ForecastConfig::default()).unwrap();
        assert_eq!(multi, vec![one.point]);
    }

    #[test]
    fn constant_series_multi_step_stays_near_the_constant() {
        // each appended forecast is the grid snap of the constant, so the
        // whole horizon stays within a snap of it
        let series = vec![0.5; 60];
        let points = forecast_multi(&series, 5, &ForecastConfig::default()).unwrap();
        let snap = 0.01 * 0.1; // grid step on the padded interval width
        for &p in &points {
            assert_abs_diff_eq!(p, 0.5, epsilon = 2.0 * snap);
        }
        let spread = points.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
            - points.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(spread <= 2.0 * snap, "spread {spread}");
    }

    #[test]
    fn windowed_multi_step_runs_on_sliding_history() {
        let series: Vec<f64> = (0..24).map(|i| [5.0, 6.0, 7.0, 6.0][i % 4]).collect();
        let cfg = ForecastConfig {
            windows: Some(WindowSpec::equiprobable(vec![8, 16, 24])),
            ..Default::default()
        };
        let points = forecast_multi(&series, 3, &cfg).unwrap();
        assert_eq!(points.len(), 3);
    }

    #[test]
    fn forecasts_are_deterministic() {
        let series: Vec<f64> = (0..50).map(|i| (i as f64 * 0.618).sin()).collect();
        let cfg = ForecastConfig::default();
        let a = forecast_one(&series, &cfg).unwrap();
        let b = forecast_one(&series, &cfg).unwrap();
        assert_eq!(a.point, b.point);
        assert_eq!(a.scores, b.scores);
        assert_eq!(a.ties_broken, b.ties_broken);
    }

    #[test]
    fn difference_transform_predicts_trends() {
        // strictly increasing ramp: increments are constant, so the
        // difference forecaster should continue the ramp
        let series: Vec<f64> = (0..40).map(|i| 10.0 + 2.0 * i as f64).collect();
        let cfg = ForecastConfig {
            transform: Transform::Difference,
            ..Default::default()
        };
        let fc = forecast_one(&series, &cfg).unwrap();
        let last = *series.last().unwrap();
        assert!(
            (fc.point - (last + 2.0)).abs() < 0.2,
            "expected ~{} got {}",
            last + 2.0,
            fc.point
        );
    }

    #[test]
    fn forecasting_works_in_f32() {
        let series: Vec<f32> = (0..45).map(|i| [1.0f32, 2.0, 3.0][i % 3]).collect();
        let cfg = ForecastConfig::<f32> {
            interval: Some(Interval::new(0.0f32, 4.0).unwrap()),
            ..Default::default()
        };
        let fc = forecast_one(&series, &cfg).unwrap();
        assert!((fc.point - 1.0).abs() <= fc.finest_bin_width.max(0.05));
    }

    #[test]
    fn ties_break_toward_the_last_value() {
        // two observations in opposite halves, history too short to favor
        // either: scores over a flat region tie and the break must pick the
        // candidate nearest the last value
        let series: Vec<f64> = vec![0.2, 0.8, 0.2, 0.8];
        let fc = forecast_one(&series, &ForecastConfig::default()).unwrap();
        assert!(fc.point.is_finite());
    }
}
