//! The Krichevsky–Trofimov estimator for a fixed Markov order.
//!
//! Two routes to the same measure: [`kt_conditional`] is the add-1/2
//! sequential rule used by the production path, and [`kt_block_log`] is the
//! closed gamma-ratio form over final counts, kept as an independent oracle.

use std::collections::HashMap;

use crate::logp::LogValue;
use crate::measure::{ContextTree, Symbol, SymbolSequence};
use crate::num::Real;

/// Sequential KT probability of seeing `symbol` after `context`:
/// `(count(context.symbol) + 1/2) / (total(context) + |A|/2)`.
///
/// Unseen contexts fall out as the uniform `1/|A|`. The conditionals over a
/// fixed context sum to one by construction.
pub fn kt_conditional<T: Real>(tree: &ContextTree, context: &[Symbol], symbol: Symbol) -> T {
    debug_assert!(context.len() <= tree.max_order());
    let (count, total) = tree.stats(context, symbol);
    let half = T::half();
    let a = T::from_count(tree.alphabet().size() as u64);
    (T::from_count(count) + half) / (T::from_count(total) + a * half)
}

/// Closed-form log2 of the order-`m` KT measure of a whole sequence.
///
/// Sequences no longer than the order are uniform, `|A|^-t`; otherwise the
/// gamma-ratio product over observed contexts applies (unobserved contexts
/// contribute a factor of one and are skipped). The empty sequence has
/// measure one.
pub fn kt_block_log<T: Real>(x: &SymbolSequence, order: usize) -> LogValue<T> {
    let t = x.len();
    let a_size = x.alphabet().size() as u64;
    let log2_a = T::from_count(a_size).log2();
    if t <= order {
        return LogValue::from_log2(-T::from_count(t as u64) * log2_a);
    }

    // final counts of (order-m context, continuation) over sliding windows
    let mut contexts: HashMap<&[Symbol], HashMap<Symbol, u64>> = HashMap::new();
    let symbols = x.symbols();
    for pos in order..t {
        let ctx = &symbols[pos - order..pos];
        *contexts.entry(ctx).or_default().entry(symbols[pos]).or_default() += 1;
    }

    let half = T::half();
    let lg_half = half.log2_gamma();
    let lg_alpha_half = (T::from_count(a_size) * half).log2_gamma();
    let mut log2 = -T::from_count(order as u64) * log2_a;
    for counts in contexts.values() {
        let mut context_total = 0u64;
        for (_, &count) in counts.iter() {
            log2 = log2 + (T::from_count(count) + half).log2_gamma() - lg_half;
            context_total += count;
        }
        log2 = log2 + lg_alpha_half - (T::from_count(context_total) + T::from_count(a_size) * half).log2_gamma();
    }
    LogValue::from_log2(log2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::Alphabet;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn binary(digits: &str) -> SymbolSequence {
        SymbolSequence::from_digits(digits, Alphabet::new(2).unwrap()).unwrap()
    }

    #[test]
    fn short_sequences_are_uniform() {
        // t = 2 <= m = 3 hits the uniform branch
        assert_abs_diff_eq!(kt_block_log::<f64>(&binary("01"), 3).log2(), -2.0, epsilon = 1e-15);
    }

    #[test]
    fn single_symbol_is_a_coin_flip() {
        assert_abs_diff_eq!(kt_block_log::<f64>(&binary("0"), 0).log2(), -1.0, epsilon = 1e-15);
    }

    #[test]
    fn order_zero_pair_matches_sequential_product() {
        // (1/2) * (3/4) = 3/8
        assert_relative_eq!(
            kt_block_log::<f64>(&binary("00"), 0).log2(),
            0.375f64.log2(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn empty_sequence_has_measure_one() {
        let empty = SymbolSequence::empty(Alphabet::new(2).unwrap());
        assert_eq!(kt_block_log::<f64>(&empty, 0).log2(), 0.0);
        assert_eq!(kt_block_log::<f64>(&empty, 3).log2(), 0.0);
    }

    #[test]
    fn conditional_is_the_add_half_ratio() {
        // "000010": context 0 continues with 0 three times and with 1 once
        let mut tree = ContextTree::new(Alphabet::new(2).unwrap(), 1);
        for &s in &[0u32, 0, 0, 0, 1, 0] {
            tree.append(s).unwrap();
        }
        assert_eq!(tree.count(&[0], 0), 3);
        assert_eq!(tree.total(&[0]), 4);
        assert_relative_eq!(kt_conditional::<f64>(&tree, &[0], 0), 3.5 / 5.0, epsilon = 1e-15);
    }

    #[test]
    fn empty_tree_gives_uniform_conditionals() {
        let tree = ContextTree::new(Alphabet::new(2).unwrap(), 2);
        assert_abs_diff_eq!(kt_conditional::<f64>(&tree, &[], 0), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(kt_conditional::<f64>(&tree, &[], 1), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn conditionals_sum_to_one() {
        let alphabet = Alphabet::new(4).unwrap();
        let mut tree = ContextTree::new(alphabet, 2);
        for &s in &[0u32, 3, 2, 2, 1, 0, 3, 3, 2, 0] {
            tree.append(s).unwrap();
        }
        for ctx in [&[][..], &[2][..], &[3, 2][..]] {
            let sum: f64 = alphabet.symbols().map(|a| kt_conditional::<f64>(&tree, ctx, a)).sum();
            assert_abs_diff_eq!(sum, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn sequential_product_matches_block_form() {
        let x = binary("00");
        let mut tree = ContextTree::new(x.alphabet(), 0);
        let mut log2 = 0.0f64;
        for &s in x.symbols() {
            log2 += kt_conditional::<f64>(&tree, &[], s).log2();
            tree.append(s).unwrap();
        }
        assert_relative_eq!(log2, 0.375f64.log2(), epsilon = 1e-12);
        assert_relative_eq!(log2, kt_block_log::<f64>(&x, 0).log2(), epsilon = 1e-12);
    }
}
