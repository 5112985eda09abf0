//! The order mixture: every Markov order weighted by the telescoping prior.
//!
//! The mixture is kept incrementally: one log-probability accumulator per
//! order, each advanced by the sequential KT conditional of the appended
//! symbol. Candidate continuations are scored without mutating anything.

use crate::error::{Error, Result};
use crate::logp::LogValue;
use crate::measure::{
    kt_conditional, telescoping_tail, telescoping_weight, Alphabet, ContextTree, MixtureConfig,
    Symbol, SymbolSequence,
};
use crate::num::Real;

/// Incremental evaluator of the order-mixture measure over one sequence.
///
/// Holds the context tree plus `log2 K_i(x)` for every order
/// `i <= max_order`; appending a symbol costs one KT conditional per order.
pub struct MeasureState<T: Real> {
    cfg: MixtureConfig,
    tree: ContextTree,
    order_logs: Vec<T>,
}

impl<T: Real> MeasureState<T> {
    pub fn new(alphabet: Alphabet, cfg: MixtureConfig) -> Self {
        MeasureState {
            cfg,
            tree: ContextTree::new(alphabet, cfg.max_order),
            order_logs: vec![T::zero(); cfg.max_order + 1],
        }
    }

    pub fn from_sequence(x: &SymbolSequence, cfg: MixtureConfig) -> Self {
        let mut state = MeasureState::new(x.alphabet(), cfg);
        for &s in x.symbols() {
            state.append(s).expect("sequence symbols are in range");
        }
        state
    }

    pub fn len(&self) -> usize {
        self.tree.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tree.is_empty()
    }

    pub fn alphabet(&self) -> Alphabet {
        self.tree.alphabet()
    }

    pub fn config(&self) -> MixtureConfig {
        self.cfg
    }

    fn log2_alphabet(&self) -> T {
        T::from_count(self.alphabet().size() as u64).log2()
    }

    /// log2 of the per-order conditional for appending `symbol` now.
    /// Orders deeper than the available history predict uniformly.
    fn order_conditional_log(&self, order: usize, symbol: Symbol) -> T {
        let t = self.tree.len();
        if t < order {
            -self.log2_alphabet()
        } else {
            let context = &self.tree.history()[t - order..t];
            kt_conditional::<T>(&self.tree, context, symbol).log2()
        }
    }

    /// Advances every order accumulator and the context tree by one symbol.
    pub fn append(&mut self, symbol: Symbol) -> Result<()> {
        self.alphabet().check(symbol)?;
        for order in 0..=self.cfg.max_order {
            let delta = self.order_conditional_log(order, symbol);
            self.order_logs[order] += delta;
        }
        self.tree.append(symbol)
    }

    /// log2 of the mixture measure of the sequence seen so far.
    pub fn measure_log(&self) -> LogValue<T> {
        self.combine(&self.order_logs, self.tree.len())
    }

    /// log2 of the mixture measure of the current sequence extended by
    /// `symbol`, computed without mutating the state.
    pub fn appended_measure_log(&self, symbol: Symbol) -> Result<LogValue<T>> {
        self.alphabet().check(symbol)?;
        let extended: Vec<T> = (0..=self.cfg.max_order)
            .map(|order| self.order_logs[order] + self.order_conditional_log(order, symbol))
            .collect();
        Ok(self.combine(&extended, self.tree.len() + 1))
    }

    /// Conditional probability of `symbol` as the next element.
    pub fn conditional(&self, symbol: Symbol) -> Result<T> {
        let num = self.appended_measure_log(symbol)?;
        Ok(num.log2_ratio(self.measure_log()).exp2())
    }

    /// Mixes the per-order measures for a sequence of length `t`.
    ///
    /// Every order at or beyond `t` is still in its uniform phase and equals
    /// `|A|^-t`, so with `exact_tail` and `t <= max_order + 1` the whole tail
    /// beyond the explicit orders folds into a single closed-form term and the
    /// result is the exact infinite mixture. Otherwise the residual prior mass
    /// attaches to the deepest tracked order, which keeps the truncation a
    /// probability measure.
    fn combine(&self, order_logs: &[T], t: usize) -> LogValue<T> {
        if t == 0 {
            return LogValue::one();
        }
        let d = self.cfg.max_order;
        let mut terms = Vec::with_capacity(d + 2);
        if self.cfg.exact_tail && t <= d + 1 {
            for (i, &log_k) in order_logs.iter().take(t).enumerate() {
                terms.push(LogValue::from_log2(
                    telescoping_weight::<T>(i + 1).log2() + log_k,
                ));
            }
            let uniform = -T::from_count(t as u64) * self.log2_alphabet();
            terms.push(LogValue::from_log2(
                telescoping_tail::<T>(t).log2() + uniform,
            ));
        } else {
            for (i, &log_k) in order_logs.iter().take(d).enumerate() {
                terms.push(LogValue::from_log2(
                    telescoping_weight::<T>(i + 1).log2() + log_k,
                ));
            }
            terms.push(LogValue::from_log2(
                telescoping_tail::<T>(d).log2() + order_logs[d],
            ));
        }
        LogValue::sum(&terms)
    }
}

/// log2 of the order-mixture measure of `x`.
pub fn mixture_measure_log<T: Real>(x: &SymbolSequence, cfg: MixtureConfig) -> LogValue<T> {
    MeasureState::from_sequence(x, cfg).measure_log()
}

/// Conditional probability of `symbol` following `x` under the mixture.
pub fn mixture_conditional<T: Real>(
    x: &SymbolSequence,
    symbol: Symbol,
    cfg: MixtureConfig,
) -> Result<T> {
    MeasureState::from_sequence(x, cfg).conditional(symbol)
}

/// Per-symbol code length `-log2 R(x) / t` in bits; converges to the entropy
/// rate of the source that generated `x`.
pub fn empirical_log_loss<T: Real>(x: &SymbolSequence, cfg: MixtureConfig) -> Result<T> {
    if x.is_empty() {
        return Err(Error::EmptySequence);
    }
    let log = mixture_measure_log::<T>(x, cfg).log2();
    Ok(-log / T::from_count(x.len() as u64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn binary(digits: &str) -> SymbolSequence {
        SymbolSequence::from_digits(digits, Alphabet::new(2).unwrap()).unwrap()
    }

    #[test]
    fn single_symbol_measure_is_half() {
        for exact_tail in [true, false] {
            let cfg = MixtureConfig {
                max_order: 8,
                exact_tail,
            };
            let r = mixture_measure_log::<f64>(&binary("0"), cfg);
            assert_abs_diff_eq!(r.linear(), 0.5, epsilon = 1e-14);
        }
    }

    #[test]
    fn two_symbol_exact_value() {
        // exact two-term evaluation: w1 * K0("00") + (1 - w1) * K1("00")
        let w1 = telescoping_weight::<f64>(1);
        let expected = w1 * 0.375 + (1.0 - w1) * 0.25;
        let r = mixture_measure_log::<f64>(&binary("00"), MixtureConfig::default());
        assert_relative_eq!(r.linear(), expected, epsilon = 1e-12);
    }

    #[test]
    fn conditional_after_zero() {
        let w1 = telescoping_weight::<f64>(1);
        let expected = (w1 * 0.375 + (1.0 - w1) * 0.25) / 0.5;
        let c = mixture_conditional::<f64>(&binary("0"), 0, MixtureConfig::default()).unwrap();
        assert_relative_eq!(c, expected, epsilon = 1e-12);
    }

    #[test]
    fn conditional_on_empty_history_is_uniform() {
        let empty = SymbolSequence::empty(Alphabet::new(2).unwrap());
        let c = mixture_conditional::<f64>(&empty, 1, MixtureConfig::default()).unwrap();
        assert_abs_diff_eq!(c, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn conditionals_sum_to_one() {
        let alphabet = Alphabet::new(3).unwrap();
        let x = SymbolSequence::from_digits("0212210012", alphabet).unwrap();
        for exact_tail in [true, false] {
            for max_order in [0usize, 2, 5, 32] {
                let cfg = MixtureConfig {
                    max_order,
                    exact_tail,
                };
                let state = MeasureState::<f64>::from_sequence(&x, cfg);
                let sum: f64 = alphabet
                    .symbols()
                    .map(|a| state.conditional(a).unwrap())
                    .sum();
                assert_abs_diff_eq!(sum, 1.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn constant_data_drives_conditional_to_one() {
        let mut state = MeasureState::<f64>::new(Alphabet::new(2).unwrap(), MixtureConfig::default());
        for _ in 0..10_000 {
            state.append(0).unwrap();
        }
        assert!(state.conditional(0).unwrap() > 0.99);
    }

    #[test]
    fn learning_on_a_cycle_is_monotone() {
        // deterministic order-1 cycle 0101...; the conditional of the true
        // next symbol keeps growing with evidence
        let mut state = MeasureState::<f64>::new(Alphabet::new(2).unwrap(), MixtureConfig::default());
        let mut at_30 = 0.0;
        for t in 0..300 {
            let sym = (t % 2) as Symbol;
            state.append(sym).unwrap();
            if t + 1 == 30 {
                at_30 = state.conditional(((t + 1) % 2) as Symbol).unwrap();
            }
        }
        let at_300 = state.conditional(0).unwrap();
        assert!(at_300 > at_30, "expected {at_300} > {at_30}");
    }

    #[test]
    fn log_loss_of_single_symbol_is_one_bit() {
        let loss = empirical_log_loss::<f64>(&binary("0"), MixtureConfig::default()).unwrap();
        assert_abs_diff_eq!(loss, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn log_loss_rejects_empty_input() {
        let empty = SymbolSequence::empty(Alphabet::new(2).unwrap());
        assert!(empirical_log_loss::<f64>(&empty, MixtureConfig::default()).is_err());
    }

    #[test]
    fn measure_is_additive_over_extensions() {
        // sum_a R(x a) = R(x), both truncation modes
        let alphabet = Alphabet::new(2).unwrap();
        let x = SymbolSequence::from_digits("0110100", alphabet).unwrap();
        for exact_tail in [true, false] {
            for max_order in [0usize, 1, 3, 32] {
                let cfg = MixtureConfig {
                    max_order,
                    exact_tail,
                };
                let r_x = mixture_measure_log::<f64>(&x, cfg).linear();
                let mut sum = 0.0;
                for a in alphabet.symbols() {
                    let mut ext = x.clone();
                    ext.push(a).unwrap();
                    sum += mixture_measure_log::<f64>(&ext, cfg).linear();
                }
                assert_relative_eq!(sum, r_x, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn brute_force_normalization_small() {
        // sum over all binary strings of length t
        let alphabet = Alphabet::new(2).unwrap();
        let cfg = MixtureConfig::default();
        for t in 1..=6usize {
            let mut sum = 0.0f64;
            for bits in 0..(1u32 << t) {
                let symbols: Vec<Symbol> = (0..t).map(|k| (bits >> k) & 1).collect();
                let x = SymbolSequence::new(symbols, alphabet).unwrap();
                sum += mixture_measure_log::<f64>(&x, cfg).linear();
            }
            assert_relative_eq!(sum, 1.0, max_relative = 1e-10);
        }
    }

    #[test]
    fn works_in_f32_too() {
        let r = mixture_measure_log::<f32>(&binary("0"), MixtureConfig::default());
        assert_abs_diff_eq!(r.linear(), 0.5, epsilon = 1e-5);
    }
}
