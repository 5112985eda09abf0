//! Density estimation over a real interval.
//!
//! A real series is quantized at every partition level in a chosen set; the
//! finite-alphabet mixture measure of each quantized sequence, divided by the
//! Lebesgue volume of its bins, gives a per-level density estimate, and the
//! telescoping prior mixes the levels. Conditionals of this density drive the
//! forecaster. A second mixture over trailing windows of different sizes
//! (the adaptive mode) guards against stale history.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::logp::LogValue;
use crate::measure::{telescoping_weight, MeasureState, MixtureConfig};
use crate::num::Real;
use crate::quantize::{resolution_level, Interval, Quantizer, HARD_LEVEL_CAP};

/// A real-valued series together with the interval all its values live in.
#[derive(Debug, Clone, PartialEq)]
pub struct RealSeries<T> {
    values: Vec<T>,
    interval: Interval<T>,
}

impl<T: Real> RealSeries<T> {
    pub fn new(values: Vec<T>, interval: Interval<T>) -> Result<Self> {
        for &v in &values {
            interval.check(v)?;
        }
        Ok(RealSeries { values, interval })
    }

    /// Derives the interval from the data, padded by 5% of the spread on
    /// each side so candidate points beyond the observed range stay scoreable.
    pub fn from_values(values: Vec<T>) -> Result<Self> {
        let interval = Interval::containing(&values, T::from_f64_lossy(0.05))?;
        Ok(RealSeries { values, interval })
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn interval(&self) -> Interval<T> {
        self.interval
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// How the set of partition levels entering the mixture is chosen.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum LevelPolicy {
    /// Refine until all distinct points (series plus any candidate points)
    /// occupy distinct bins, then use every level up to that one.
    Auto,
    /// An explicit set of levels.
    Fixed(Vec<u32>),
}

/// Configuration of the density estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityConfig {
    /// Cap on the refinement depth; near-duplicate values would otherwise
    /// drive the resolution level unboundedly.
    pub max_level: u32,
    pub mixture: MixtureConfig,
    pub level_policy: LevelPolicy,
}

impl Default for DensityConfig {
    fn default() -> Self {
        DensityConfig {
            max_level: 20,
            mixture: MixtureConfig::default(),
            level_policy: LevelPolicy::Auto,
        }
    }
}

/// Weighting of the window mixture.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightMode {
    Telescoping,
    Equiprobable,
}

/// The set of trailing-window sizes mixed in adaptive mode.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowSpec {
    pub sizes: Vec<usize>,
    pub weight_mode: WeightMode,
}

impl WindowSpec {
    pub fn equiprobable(sizes: Vec<usize>) -> Self {
        WindowSpec {
            sizes,
            weight_mode: WeightMode::Equiprobable,
        }
    }

    pub fn telescoping(sizes: Vec<usize>) -> Self {
        WindowSpec {
            sizes,
            weight_mode: WeightMode::Telescoping,
        }
    }

    /// Sizes sorted ascending, validated distinct, non-empty and within `len`.
    pub fn sorted_sizes(&self, len: usize) -> Result<Vec<usize>> {
        if self.sizes.is_empty() {
            return Err(Error::BadWindow { size: 0, len });
        }
        let mut sizes = self.sizes.clone();
        sizes.sort_unstable();
        for pair in sizes.windows(2) {
            if pair[0] == pair[1] {
                return Err(Error::BadWindow { size: pair[0], len });
            }
        }
        for &n in &sizes {
            if n == 0 || n > len {
                return Err(Error::BadWindow { size: n, len });
            }
        }
        Ok(sizes)
    }
}

/// Mixture weights over `k` windows, ascending-size order.
///
/// Telescoping mode gives window `i < k` the prior weight of index `i` and
/// the last window the residual `1/log2(k+1)`; equiprobable mode gives `1/k`
/// each. The last weight is computed as one minus the rest, so the weights
/// sum to exactly one in floating point.
pub fn window_weights<T: Real>(k: usize, mode: WeightMode) -> Vec<T> {
    assert!(k >= 1, "window mixture needs at least one window");
    let mut weights = Vec::with_capacity(k);
    let mut partial = T::zero();
    for i in 1..k {
        let w = match mode {
            WeightMode::Telescoping => telescoping_weight::<T>(i),
            WeightMode::Equiprobable => T::from_count(k as u64).recip(),
        };
        weights.push(w);
        partial += w;
    }
    weights.push(T::one() - partial);
    weights
}

struct LevelEval<T: Real> {
    quantizer: Quantizer<T>,
    state: MeasureState<T>,
    log_weight: T,
    log_width: T,
}

/// Frozen density evaluator for one history at one fixed level set.
///
/// Candidate continuations are scored read-only, so one evaluator can serve
/// a whole candidate grid (concurrently, if desired). Numerator and
/// denominator of a conditional always share the level set by construction.
pub struct DensityEvaluator<T: Real> {
    interval: Interval<T>,
    len: usize,
    levels: Vec<LevelEval<T>>,
    capped: bool,
}

impl<T: Real> DensityEvaluator<T> {
    /// Builds the evaluator; `candidate_points` take part in the automatic
    /// level selection so every candidate can later be scored at a level set
    /// that tells it apart from the data (subject to the level cap).
    pub fn new(series: &RealSeries<T>, cfg: &DensityConfig, candidate_points: &[T]) -> Result<Self> {
        let interval = series.interval();
        let (level_set, capped) = match &cfg.level_policy {
            LevelPolicy::Auto => {
                let mut points = series.values().to_vec();
                points.extend_from_slice(candidate_points);
                let r = resolution_level(&points, interval, cfg.max_level)?;
                ((1..=r.level).collect::<Vec<u32>>(), r.capped)
            }
            LevelPolicy::Fixed(levels) => {
                let mut set = levels.clone();
                set.sort_unstable();
                set.dedup();
                if set.is_empty() || set[0] < 1 {
                    return Err(Error::LevelTooSmall);
                }
                if *set.last().unwrap() > HARD_LEVEL_CAP {
                    return Err(Error::LevelTooLarge(*set.last().unwrap()));
                }
                (set, false)
            }
        };

        let mut levels = Vec::with_capacity(level_set.len());
        for &level in &level_set {
            let quantizer = Quantizer::new(interval, level)?;
            let mut state = MeasureState::new(quantizer.alphabet(), cfg.mixture);
            for &v in series.values() {
                state.append(quantizer.bin_index(v)?)?;
            }
            levels.push(LevelEval {
                quantizer,
                state,
                log_weight: telescoping_weight::<T>(level as usize).log2(),
                log_width: interval.width().log2() - T::from_count(level as u64),
            });
        }
        Ok(DensityEvaluator {
            interval,
            len: series.len(),
            levels,
            capped,
        })
    }

    pub fn interval(&self) -> Interval<T> {
        self.interval
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn level_set(&self) -> Vec<u32> {
        self.levels.iter().map(|l| l.quantizer.level()).collect()
    }

    pub fn finest_level(&self) -> u32 {
        self.levels.last().map(|l| l.quantizer.level()).unwrap_or(1)
    }

    pub fn finest_bin_width(&self) -> T {
        self.interval.width() / T::from_count(1u64 << self.finest_level())
    }

    pub fn resolution_capped(&self) -> bool {
        self.capped
    }

    /// log2 of the density of the history itself.
    pub fn density_log(&self) -> LogValue<T> {
        let t = T::from_count(self.len as u64);
        let terms: Vec<LogValue<T>> = self
            .levels
            .iter()
            .map(|l| LogValue::from_log2(l.log_weight + l.state.measure_log().log2() - t * l.log_width))
            .collect();
        LogValue::sum(&terms)
    }

    /// log2 of the density of the history extended by `candidate`.
    pub fn appended_density_log(&self, candidate: T) -> Result<LogValue<T>> {
        let t1 = T::from_count(self.len as u64 + 1);
        let mut terms = Vec::with_capacity(self.levels.len());
        for l in &self.levels {
            let bin = l.quantizer.bin_index(candidate)?;
            let measure = l.state.appended_measure_log(bin)?;
            terms.push(LogValue::from_log2(l.log_weight + measure.log2() - t1 * l.log_width));
        }
        Ok(LogValue::sum(&terms))
    }

    /// log2 of the conditional density of `candidate` given the history.
    pub fn conditional_log(&self, candidate: T) -> Result<LogValue<T>> {
        let num = self.appended_density_log(candidate)?;
        Ok(LogValue::from_log2(num.log2_ratio(self.density_log())))
    }
}

/// Window-mixture evaluator: one [`DensityEvaluator`] per trailing window,
/// each with its own automatically chosen level set, mixed by the window
/// weights.
pub struct WindowedEvaluator<T: Real> {
    parts: Vec<(T, DensityEvaluator<T>)>,
}

impl<T: Real> WindowedEvaluator<T> {
    pub fn new(
        series: &RealSeries<T>,
        spec: &WindowSpec,
        cfg: &DensityConfig,
        candidate_points: &[T],
    ) -> Result<Self> {
        let sizes = spec.sorted_sizes(series.len())?;
        let weights = window_weights::<T>(sizes.len(), spec.weight_mode);
        let mut parts = Vec::with_capacity(sizes.len());
        for (&n, &w) in sizes.iter().zip(&weights) {
            let window = RealSeries::new(
                series.values()[series.len() - n..].to_vec(),
                series.interval(),
            )?;
            parts.push((w, DensityEvaluator::new(&window, cfg, candidate_points)?));
        }
        Ok(WindowedEvaluator { parts })
    }

    pub fn density_log(&self) -> LogValue<T> {
        let terms: Vec<LogValue<T>> = self
            .parts
            .iter()
            .map(|(w, eval)| LogValue::from_linear(*w) * eval.density_log())
            .collect();
        LogValue::sum(&terms)
    }

    /// Every window is extended by the candidate, so each summand stays a
    /// proper density over the candidate and the mixture conditional
    /// integrates to one.
    pub fn appended_density_log(&self, candidate: T) -> Result<LogValue<T>> {
        let mut terms = Vec::with_capacity(self.parts.len());
        for (w, eval) in &self.parts {
            terms.push(LogValue::from_linear(*w) * eval.appended_density_log(candidate)?);
        }
        Ok(LogValue::sum(&terms))
    }

    pub fn conditional_log(&self, candidate: T) -> Result<LogValue<T>> {
        let num = self.appended_density_log(candidate)?;
        Ok(LogValue::from_log2(num.log2_ratio(self.density_log())))
    }

    pub fn finest_level(&self) -> u32 {
        self.parts.iter().map(|(_, e)| e.finest_level()).max().unwrap_or(1)
    }

    pub fn resolution_capped(&self) -> bool {
        self.parts.iter().any(|(_, e)| e.resolution_capped())
    }
}

/// log2 of the level-mixture density of a non-empty series.
pub fn density_log<T: Real>(series: &RealSeries<T>, cfg: &DensityConfig) -> Result<LogValue<T>> {
    if series.is_empty() {
        return Err(Error::EmptySequence);
    }
    Ok(DensityEvaluator::new(series, cfg, &[])?.density_log())
}

/// Conditional density of `candidate` given `series` (which may be empty).
///
/// Under the automatic level policy the candidate joins the level selection,
/// mirroring how the forecaster fixes one level set over history and grid.
pub fn conditional_density<T: Real>(
    series: &RealSeries<T>,
    candidate: T,
    cfg: &DensityConfig,
) -> Result<T> {
    let eval = DensityEvaluator::new(series, cfg, &[candidate])?;
    Ok(eval.conditional_log(candidate)?.linear())
}

/// log2 of the adaptive (window-mixture) density of a series.
pub fn windowed_density_log<T: Real>(
    series: &RealSeries<T>,
    windows: &WindowSpec,
    cfg: &DensityConfig,
) -> Result<LogValue<T>> {
    if series.is_empty() {
        return Err(Error::EmptySequence);
    }
    Ok(WindowedEvaluator::new(series, windows, cfg, &[])?.density_log())
}
