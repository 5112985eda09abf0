//! The telescoping prior on positive integers used by every mixture in the
//! crate: over Markov orders, over partition levels, and over window sizes.

use crate::num::Real;

/// Weight of index `i >= 1`: `1/log2(i+1) - 1/log2(i+2)`.
///
/// Strictly positive and summing to one over all `i`; partial sums telescope,
/// which is what makes the residual mass of a truncated mixture available in
/// closed form.
///
/// # Panics
/// If `i == 0`; the distribution is defined on `{1, 2, ...}`.
pub fn telescoping_weight<T: Real>(i: usize) -> T {
    assert!(i >= 1, "telescoping weight index starts at 1");
    let a = T::from_count((i + 1) as u64).log2();
    let b = T::from_count((i + 2) as u64).log2();
    a.recip() - b.recip()
}

/// Residual mass beyond index `k`: `sum_{i > k} w_i = 1/log2(k+2)`.
pub fn telescoping_tail<T: Real>(k: usize) -> T {
    T::from_count((k + 2) as u64).log2().recip()
}
