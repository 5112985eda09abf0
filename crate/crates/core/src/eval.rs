//! Rolling-origin evaluation: repeated one-step (or recursive multi-step)
//! forecasts over trailing histories of several lengths, scored by MAE
//! against the actual values and against a baseline over exactly the same
//! target indices. Seeded synthetic sources provide analytic entropy targets
//! for the universality checks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::density::{WeightMode, WindowSpec};
use crate::error::{Error, Result};
use crate::forecast::{forecast_multi, forecast_one, ForecastConfig, Transform};
use crate::measure::{Alphabet, Symbol, SymbolSequence};
use crate::num::Real;

/// Baseline that repeats the last observed value.
pub fn inertial_forecast<T: Real>(series: &[T]) -> Result<T> {
    series.last().copied().ok_or(Error::EmptySequence)
}

/// Mean absolute error between paired forecasts and actuals.
pub fn mean_absolute_error<T: Real>(forecasts: &[T], actuals: &[T]) -> Result<T> {
    if forecasts.is_empty() || forecasts.len() != actuals.len() {
        return Err(Error::InvalidPlan(vec![format!(
            "MAE needs equal-length non-empty vectors, got {} and {}",
            forecasts.len(),
            actuals.len()
        )]));
    }
    let sum: T = forecasts
        .iter()
        .zip(actuals)
        .map(|(&f, &a)| (f - a).abs())
        .sum();
    Ok(sum / T::from_count(forecasts.len() as u64))
}

/// Forecast protocol per rolling origin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvalMode {
    OneStep,
    Recursive { horizon: usize },
}

/// What the method is compared against.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BaselineSpec {
    Inertial,
    /// Per-row residuals of an external forecaster, supplied as a dataset
    /// column (observed minus predicted, so the absolute value is that
    /// forecaster's absolute error).
    ExternalColumn { name: String },
}

impl BaselineSpec {
    pub fn label(&self) -> String {
        match self {
            BaselineSpec::Inertial => "inertial".to_string(),
            BaselineSpec::ExternalColumn { name } => format!("column:{name}"),
        }
    }
}

/// A rolling-origin experiment grid.
///
/// Targets anchor at the end of the dataset: the last experiment predicts the
/// final value and earlier experiments step back by `stride`. Every
/// configuration (each history length, and the adaptive mixture) predicts the
/// same target set, so MAE columns and the baseline are directly comparable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPlan {
    /// Trailing history lengths, one forecast configuration per entry.
    pub lengths: Vec<usize>,
    /// Also run the window mixture with all listed lengths as window sizes.
    pub adaptive: bool,
    pub adaptive_weight_mode: WeightMode,
    /// Rolling origins per configuration.
    pub experiments: usize,
    /// Distance between consecutive origins.
    pub stride: usize,
    pub mode: EvalMode,
    pub baseline: BaselineSpec,
}

impl ExperimentPlan {
    pub fn one_step(lengths: Vec<usize>, experiments: usize) -> Self {
        ExperimentPlan {
            lengths,
            adaptive: false,
            adaptive_weight_mode: WeightMode::Equiprobable,
            experiments,
            stride: 1,
            mode: EvalMode::OneStep,
            baseline: BaselineSpec::Inertial,
        }
    }

    fn span(&self) -> usize {
        match self.mode {
            EvalMode::OneStep => 1,
            EvalMode::Recursive { horizon } => horizon,
        }
    }

    /// Enumerates every constraint violation instead of stopping at the first.
    pub fn validate<T: Real>(
        &self,
        n: usize,
        fcfg: &ForecastConfig<T>,
        external: Option<&[T]>,
    ) -> Result<()> {
        let mut problems = Vec::new();
        if self.lengths.is_empty() {
            problems.push("lengths must be non-empty".to_string());
        }
        let mut sorted = self.lengths.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            problems.push("lengths must be distinct".to_string());
        }
        let min_len = if fcfg.transform == Transform::Difference { 3 } else { 2 };
        for &len in &self.lengths {
            if len < min_len {
                problems.push(format!("length {len} is below the minimum of {min_len}"));
            }
        }
        if self.experiments < 1 {
            problems.push("experiments must be at least 1".to_string());
        }
        if self.stride < 1 {
            problems.push("stride must be at least 1".to_string());
        }
        if let EvalMode::Recursive { horizon } = self.mode {
            if horizon < 1 {
                problems.push("horizon must be at least 1".to_string());
            }
        }
        if let Some(&max_len) = sorted.last() {
            let extra = if fcfg.transform == Transform::Difference { 1 } else { 0 };
            let needed = max_len
                + extra
                + (self.experiments.saturating_sub(1)) * self.stride
                + self.span();
            if needed > n {
                problems.push(format!(
                    "plan needs {needed} observations but the dataset has {n}"
                ));
            }
        }
        match (&self.baseline, external) {
            (BaselineSpec::ExternalColumn { name }, None) => {
                problems.push(format!("baseline column '{name}' was not provided"));
            }
            (BaselineSpec::ExternalColumn { name }, Some(ext)) if ext.len() != n => {
                problems.push(format!(
                    "baseline column '{name}' has {} rows, dataset has {n}",
                    ext.len()
                ));
            }
            _ => {}
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidPlan(problems))
        }
    }
}

/// Scores for one configuration (one history length, or the adaptive mode).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigurationResult<T> {
    pub label: String,
    /// History length; `None` for the adaptive configuration.
    pub length: Option<usize>,
    /// Dataset indices that were predicted; the baseline is scored over
    /// exactly this set.
    pub target_indices: Vec<usize>,
    pub errors: Vec<T>,
    pub mae: T,
    pub baseline_errors: Vec<T>,
    pub baseline_mae: T,
}

/// Full evaluation output; carries the resolved configuration so a report is
/// reproducible from its own contents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport<T> {
    pub dataset: String,
    pub observations: usize,
    pub baseline: String,
    pub plan: ExperimentPlan,
    pub forecast: ForecastConfig<T>,
    pub configurations: Vec<ConfigurationResult<T>>,
}

/// Runs the full experiment grid over `values`.
///
/// `external_residuals` must be supplied (aligned row-for-row with `values`)
/// when the plan's baseline is an external column.
pub fn run_evaluation<T: Real>(
    values: &[T],
    dataset: &str,
    plan: &ExperimentPlan,
    fcfg: &ForecastConfig<T>,
    external_residuals: Option<&[T]>,
) -> Result<EvaluationReport<T>> {
    plan.validate(values.len(), fcfg, external_residuals)?;
    let n = values.len();
    let span = plan.span();
    let extra = if fcfg.transform == Transform::Difference { 1 } else { 0 };

    // ascending origins; the last experiment's final target is the last value
    let origins: Vec<usize> = (0..plan.experiments)
        .map(|j| n - span - (plan.experiments - 1 - j) * plan.stride)
        .collect();

    let mut sorted_lengths = plan.lengths.clone();
    sorted_lengths.sort_unstable();

    let mut configurations = Vec::new();
    for &length in &sorted_lengths {
        let mut cfg = fcfg.clone();
        cfg.windows = None;
        configurations.push(run_configuration(
            values,
            &origins,
            span,
            length + extra,
            format!("length-{length}"),
            Some(length),
            &cfg,
            plan,
            external_residuals,
        )?);
    }
    if plan.adaptive {
        let mut cfg = fcfg.clone();
        cfg.windows = Some(WindowSpec {
            sizes: sorted_lengths.clone(),
            weight_mode: plan.adaptive_weight_mode,
        });
        let max_len = *sorted_lengths.last().expect("validated non-empty");
        configurations.push(run_configuration(
            values,
            &origins,
            span,
            max_len + extra,
            "adaptive".to_string(),
            None,
            &cfg,
            plan,
            external_residuals,
        )?);
    }

    Ok(EvaluationReport {
        dataset: dataset.to_string(),
        observations: n,
        baseline: plan.baseline.label(),
        plan: plan.clone(),
        forecast: fcfg.clone(),
        configurations,
    })
}

#[allow(clippy::too_many_arguments)]
fn run_configuration<T: Real>(
    values: &[T],
    origins: &[usize],
    span: usize,
    history_len: usize,
    label: String,
    length: Option<usize>,
    cfg: &ForecastConfig<T>,
    plan: &ExperimentPlan,
    external_residuals: Option<&[T]>,
) -> Result<ConfigurationResult<T>> {
    let per_origin: Vec<(Vec<usize>, Vec<T>, Vec<T>)> = origins
        .par_iter()
        .map(|&origin| {
            let history = &values[origin - history_len..origin];
            let points = match span {
                1 => vec![forecast_one(history, cfg)?.point],
                _ => forecast_multi(history, span, cfg)?,
            };
            let mut indices = Vec::with_capacity(span);
            let mut errors = Vec::with_capacity(span);
            let mut baseline_errors = Vec::with_capacity(span);
            let inertial = inertial_forecast(history)?;
            for (step, &point) in points.iter().enumerate() {
                let idx = origin + step;
                indices.push(idx);
                errors.push((point - values[idx]).abs());
                let bl = match (&plan.baseline, external_residuals) {
                    (BaselineSpec::Inertial, _) => (inertial - values[idx]).abs(),
                    (BaselineSpec::ExternalColumn { .. }, Some(ext)) => ext[idx].abs(),
                    (BaselineSpec::ExternalColumn { .. }, None) => {
                        return Err(Error::MissingBaselineColumn)
                    }
                };
                baseline_errors.push(bl);
            }
            Ok((indices, errors, baseline_errors))
        })
        .collect::<Result<_>>()?;

    let mut target_indices = Vec::new();
    let mut errors = Vec::new();
    let mut baseline_errors = Vec::new();
    for (idx, err, bl) in per_origin {
        target_indices.extend(idx);
        errors.extend(err);
        baseline_errors.extend(bl);
    }
    let mean = |xs: &[T]| xs.iter().copied().sum::<T>() / T::from_count(xs.len() as u64);
    let mae = mean(&errors);
    let baseline_mae = mean(&baseline_errors);
    Ok(ConfigurationResult {
        label,
        length,
        target_indices,
        errors,
        mae,
        baseline_errors,
        baseline_mae,
    })
}

/// Distribution family of a synthetic source.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SourceKind<T> {
    Iid { probs: Vec<T> },
    /// Order-`m` Markov chain: one row per state (the last `m` symbols,
    /// most recent last, encoded base-`alphabet`), one column per symbol.
    Markov { order: usize, transitions: Vec<Vec<T>> },
}

/// Seeded synthetic symbol source with an analytic entropy rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSource<T> {
    pub kind: SourceKind<T>,
    pub seed: u64,
}

impl<T: Real> SyntheticSource<T> {
    pub fn iid(probs: Vec<T>, seed: u64) -> Self {
        SyntheticSource {
            kind: SourceKind::Iid { probs },
            seed,
        }
    }

    pub fn markov(order: usize, transitions: Vec<Vec<T>>, seed: u64) -> Self {
        SyntheticSource {
            kind: SourceKind::Markov { order, transitions },
            seed,
        }
    }

    pub fn alphabet_size(&self) -> usize {
        match &self.kind {
            SourceKind::Iid { probs } => probs.len(),
            SourceKind::Markov { transitions, .. } => {
                transitions.first().map(|r| r.len()).unwrap_or(0)
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let check_row = |row: &[T]| -> Result<()> {
            if row.len() < 2 {
                return Err(Error::BadSource("need at least two symbols".into()));
            }
            let mut sum = T::zero();
            for &p in row {
                if p < T::zero() {
                    return Err(Error::BadSource("negative probability".into()));
                }
                sum += p;
            }
            if (sum - T::one()).abs() > T::from_f64_lossy(1e-9) {
                return Err(Error::BadSource("row does not sum to one".into()));
            }
            Ok(())
        };
        match &self.kind {
            SourceKind::Iid { probs } => check_row(probs),
            SourceKind::Markov { order, transitions } => {
                if *order < 1 {
                    return Err(Error::BadSource("Markov order must be at least 1".into()));
                }
                let k = transitions.first().map(|r| r.len()).unwrap_or(0);
                if k < 2 {
                    return Err(Error::BadSource("need at least two symbols".into()));
                }
                let states = k.checked_pow(*order as u32).ok_or_else(|| {
                    Error::BadSource("state space overflows".into())
                })?;
                if transitions.len() != states {
                    return Err(Error::BadSource(format!(
                        "expected {states} transition rows, got {}",
                        transitions.len()
                    )));
                }
                for row in transitions {
                    if row.len() != k {
                        return Err(Error::BadSource("ragged transition matrix".into()));
                    }
                    check_row(row)?;
                }
                Ok(())
            }
        }
    }

    /// Draws a reproducible length-`t` sequence.
    pub fn generate(&self, t: usize) -> Result<SymbolSequence> {
        self.validate()?;
        if t < 1 {
            return Err(Error::EmptySequence);
        }
        let k = self.alphabet_size();
        let alphabet = Alphabet::new(k)?;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut draw = |row: &[T]| -> Symbol {
            let u: f64 = rng.random();
            let mut cum = 0.0;
            for (i, &p) in row.iter().enumerate() {
                cum += p.to_f64().unwrap_or(0.0);
                if u < cum {
                    return i as Symbol;
                }
            }
            (row.len() - 1) as Symbol
        };
        let mut seq = SymbolSequence::empty(alphabet);
        match &self.kind {
            SourceKind::Iid { probs } => {
                for _ in 0..t {
                    seq.push(draw(probs))?;
                }
            }
            SourceKind::Markov { order, transitions } => {
                let uniform = vec![T::from_count(k as u64).recip(); k];
                let mut state = 0usize;
                for i in 0..t {
                    let sym = if i < *order {
                        draw(&uniform)
                    } else {
                        draw(&transitions[state])
                    };
                    seq.push(sym)?;
                    state = (state * k + sym as usize) % k.pow(*order as u32);
                }
            }
        }
        Ok(seq)
    }

    /// Exact entropy rate in bits per symbol: the entropy of the marginal for
    /// i.i.d. sources, the stationary-weighted row entropy for Markov chains.
    pub fn entropy_rate(&self) -> Result<T> {
        self.validate()?;
        let row_entropy = |row: &[T]| -> T {
            row.iter()
                .filter(|&&p| p > T::zero())
                .map(|&p| -p * p.log2())
                .sum()
        };
        match &self.kind {
            SourceKind::Iid { probs } => Ok(row_entropy(probs)),
            SourceKind::Markov { order, transitions } => {
                let k = self.alphabet_size();
                let states = k.pow(*order as u32);
                // stationary distribution by power iteration
                let mut pi = vec![T::from_count(states as u64).recip(); states];
                for _ in 0..100_000 {
                    let mut next = vec![T::zero(); states];
                    for (s, &mass) in pi.iter().enumerate() {
                        for (b, &p) in transitions[s].iter().enumerate() {
                            let s_next = (s * k + b) % states;
                            next[s_next] += mass * p;
                        }
                    }
                    let delta: T = pi
                        .iter()
                        .zip(&next)
                        .map(|(&a, &b)| (a - b).abs())
                        .sum();
                    pi = next;
                    if delta < T::from_f64_lossy(1e-15) {
                        break;
                    }
                }
                Ok(pi
                    .iter()
                    .zip(transitions)
                    .map(|(&mass, row)| mass * row_entropy(row))
                    .sum())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn inertial_returns_the_last_value() {
        assert_eq!(inertial_forecast(&[1.0, 2.0, 3.0]).unwrap(), 3.0);
        assert_eq!(inertial_forecast(&[7.0]).unwrap(), 7.0);
        assert!(inertial_forecast::<f64>(&[]).is_err());
    }

    #[test]
    fn mae_examples() {
        assert_abs_diff_eq!(
            mean_absolute_error(&[1.0, 2.0], &[1.5, 1.5]).unwrap(),
            0.5,
            epsilon = 1e-15
        );
        assert_eq!(mean_absolute_error(&[4.0, 5.0], &[4.0, 5.0]).unwrap(), 0.0);
        assert!(mean_absolute_error(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn constant_dataset_scores_zero_for_method_and_baseline() {
        let values = vec![5.0; 80];
        let plan = ExperimentPlan::one_step(vec![20, 40], 5);
        let report =
            run_evaluation(&values, "constant", &plan, &ForecastConfig::default(), None).unwrap();
        for config in &report.configurations {
            assert_abs_diff_eq!(config.mae, 0.0, epsilon = 1e-9);
            assert_eq!(config.baseline_mae, 0.0);
        }
    }

    #[test]
    fn adaptive_with_singleton_lengths_matches_fixed_exactly() {
        let values: Vec<f64> = (0..60).map(|i| [2.0, 3.0, 5.0][i % 3]).collect();
        let mut plan = ExperimentPlan::one_step(vec![30], 4);
        plan.adaptive = true;
        let report =
            run_evaluation(&values, "cycle", &plan, &ForecastConfig::default(), None).unwrap();
        assert_eq!(report.configurations.len(), 2);
        let fixed = &report.configurations[0];
        let adaptive = &report.configurations[1];
        assert_eq!(adaptive.label, "adaptive");
        assert_eq!(fixed.errors, adaptive.errors);
        assert_eq!(fixed.mae, adaptive.mae);
    }

    #[test]
    fn baseline_is_scored_over_the_predicted_indices() {
        let n = 50;
        let values: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin()).collect();
        let residuals: Vec<f64> = (0..n).map(|i| if i % 2 == 0 { 0.25 } else { -0.5 }).collect();
        let mut plan = ExperimentPlan::one_step(vec![10], 6);
        plan.baseline = BaselineSpec::ExternalColumn {
            name: "residual".to_string(),
        };
        let report = run_evaluation(
            &values,
            "ext",
            &plan,
            &ForecastConfig::default(),
            Some(&residuals),
        )
        .unwrap();
        let config = &report.configurations[0];
        assert_eq!(config.target_indices, vec![44, 45, 46, 47, 48, 49]);
        for (&idx, &bl) in config.target_indices.iter().zip(&config.baseline_errors) {
            assert_eq!(bl, residuals[idx].abs());
        }
    }

    #[test]
    fn recursive_mode_predicts_a_block_per_origin() {
        let values: Vec<f64> = (0..40).map(|i| [1.0, 2.0][i % 2]).collect();
        let mut plan = ExperimentPlan::one_step(vec![12], 2);
        plan.mode = EvalMode::Recursive { horizon: 3 };
        let report =
            run_evaluation(&values, "alt", &plan, &ForecastConfig::default(), None).unwrap();
        let config = &report.configurations[0];
        // two origins, three targets each; final block ends on the last index
        assert_eq!(config.target_indices, vec![36, 37, 38, 37, 38, 39]);
        assert_eq!(config.errors.len(), 6);
    }

    #[test]
    fn reports_are_reproducible() {
        let values: Vec<f64> = (0..70).map(|i| ((i * i) % 11) as f64).collect();
        let mut plan = ExperimentPlan::one_step(vec![20, 30], 4);
        plan.adaptive = true;
        let cfg = ForecastConfig::default();
        let a = run_evaluation(&values, "d", &plan, &cfg, None).unwrap();
        let b = run_evaluation(&values, "d", &plan, &cfg, None).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn invalid_plans_enumerate_every_violation() {
        let plan = ExperimentPlan {
            lengths: vec![],
            adaptive: false,
            adaptive_weight_mode: WeightMode::Equiprobable,
            experiments: 0,
            stride: 0,
            mode: EvalMode::OneStep,
            baseline: BaselineSpec::ExternalColumn {
                name: "x".to_string(),
            },
        };
        let err = plan
            .validate::<f64>(10, &ForecastConfig::default(), None)
            .unwrap_err();
        match err {
            Error::InvalidPlan(problems) => {
                assert!(problems.len() >= 4, "{problems:?}");
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn plan_must_fit_the_dataset() {
        let plan = ExperimentPlan::one_step(vec![50], 10);
        let err = plan
            .validate::<f64>(55, &ForecastConfig::default(), None)
            .unwrap_err();
        assert!(matches!(err, Error::InvalidPlan(_)));
    }

    #[test]
    fn iid_entropy_values() {
        let fair = SyntheticSource::iid(vec![0.5, 0.5], 1);
        assert_abs_diff_eq!(fair.entropy_rate().unwrap(), 1.0, epsilon = 1e-12);
        let biased = SyntheticSource::iid(vec![0.7, 0.3], 1);
        let expected = -(0.7f64 * 0.7f64.log2() + 0.3 * 0.3f64.log2());
        assert_relative_eq!(biased.entropy_rate().unwrap(), expected, epsilon = 1e-12);
    }

    #[test]
    fn sticky_markov_entropy_is_the_flip_entropy() {
        let source = SyntheticSource::markov(
            1,
            vec![vec![0.9, 0.1], vec![0.1, 0.9]],
            7,
        );
        let expected = -(0.9f64 * 0.9f64.log2() + 0.1 * 0.1f64.log2());
        assert_relative_eq!(source.entropy_rate().unwrap(), expected, epsilon = 1e-10);
    }

    #[test]
    fn generation_is_seed_reproducible_and_plausible() {
        let source = SyntheticSource::iid(vec![0.7, 0.3], 42);
        let a = source.generate(10_000).unwrap();
        let b = source.generate(10_000).unwrap();
        assert_eq!(a, b);
        let ones = a.symbols().iter().filter(|&&s| s == 1).count() as f64;
        assert_abs_diff_eq!(ones / 10_000.0, 0.3, epsilon = 0.02);
    }

    #[test]
    fn bad_sources_are_rejected() {
        assert!(SyntheticSource::iid(vec![0.7, 0.2], 1).generate(5).is_err());
        assert!(SyntheticSource::markov(1, vec![vec![1.0, 0.0]], 1)
            .generate(5)
            .is_err());
    }
}
