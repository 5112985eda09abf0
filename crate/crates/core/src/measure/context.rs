//! Sliding-window occurrence counts for every context order up to a cap.

use std::collections::{BTreeMap, HashMap};
use std::hash::{BuildHasher, Hasher};

use crate::error::Result;
use crate::measure::{Alphabet, Symbol};

/// FNV-1a; context words are short and the map is not adversarial, so a
/// cheap byte hash beats SipHash by a wide margin in the append loop.
#[derive(Clone)]
struct Fnv(u64);

impl Hasher for Fnv {
    fn finish(&self) -> u64 {
        self.0
    }

    fn write(&mut self, bytes: &[u8]) {
        let mut h = self.0;
        for &b in bytes {
            h = (h ^ b as u64).wrapping_mul(0x100000001b3);
        }
        self.0 = h;
    }
}

#[derive(Clone, Default)]
struct FnvBuild;

impl BuildHasher for FnvBuild {
    type Hasher = Fnv;

    fn build_hasher(&self) -> Fnv {
        Fnv(0xcbf29ce484222325)
    }
}

/// Per-context tallies: `total` is the number of continuations observed from
/// this context; `counts` holds one entry per continuation symbol seen.
#[derive(Debug, Clone)]
struct Node {
    total: u32,
    counts: Vec<(Symbol, u32)>,
}

impl Node {
    fn count(&self, symbol: Symbol) -> u32 {
        self.counts
            .iter()
            .find(|(s, _)| *s == symbol)
            .map(|(_, c)| *c)
            .unwrap_or(0)
    }
}

struct OrderUndo {
    order: usize,
    created_node: bool,
    created_pair: bool,
}

/// Occurrence counts of `context . symbol` words for every context length
/// (order) from 0 up to `max_order`, maintained incrementally.
///
/// Appends are undoable: [`ContextTree::rollback`] restores the exact state
/// before the latest append, including removal of entries the append created.
/// Storage is a sparse hash map keyed by the context word, so only observed
/// contexts cost memory regardless of the alphabet size.
pub struct ContextTree {
    alphabet: Alphabet,
    max_order: usize,
    history: Vec<Symbol>,
    nodes: HashMap<Box<[Symbol]>, Node, FnvBuild>,
    undo: Vec<Vec<OrderUndo>>,
}

impl ContextTree {
    pub fn new(alphabet: Alphabet, max_order: usize) -> Self {
        ContextTree {
            alphabet,
            max_order,
            history: Vec::new(),
            nodes: HashMap::with_hasher(FnvBuild),
            undo: Vec::new(),
        }
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    /// Number of symbols appended so far.
    pub fn len(&self) -> usize {
        self.history.len()
    }

    pub fn is_empty(&self) -> bool {
        self.history.is_empty()
    }

    pub fn history(&self) -> &[Symbol] {
        &self.history
    }

    /// Records one more symbol: for every order `i <= min(max_order, len)`,
    /// the count of the length-`i` suffix context followed by `symbol` is
    /// incremented.
    pub fn append(&mut self, symbol: Symbol) -> Result<()> {
        self.alphabet.check(symbol)?;
        let t = self.history.len();
        let deepest = self.max_order.min(t);
        let mut frame = Vec::with_capacity(deepest + 1);
        for order in 0..=deepest {
            let window = &self.history[t - order..t];
            let (created_node, created_pair) = match self.nodes.get_mut(window) {
                Some(node) => {
                    node.total += 1;
                    let created = match node.counts.iter_mut().find(|(s, _)| *s == symbol) {
                        Some((_, c)) => {
                            *c += 1;
                            false
                        }
                        None => {
                            node.counts.push((symbol, 1));
                            true
                        }
                    };
                    (false, created)
                }
                None => {
                    self.nodes.insert(
                        window.to_vec().into_boxed_slice(),
                        Node {
                            total: 1,
                            counts: vec![(symbol, 1)],
                        },
                    );
                    (true, true)
                }
            };
            frame.push(OrderUndo {
                order,
                created_node,
                created_pair,
            });
        }
        self.undo.push(frame);
        self.history.push(symbol);
        Ok(())
    }

    /// Undoes the latest append and returns the removed symbol. The count
    /// maps afterwards are identical to a from-scratch recount of the
    /// shortened history.
    pub fn rollback(&mut self) -> Option<Symbol> {
        let frame = self.undo.pop()?;
        let symbol = *self.history.last().expect("undo frame implies history");
        let t = self.history.len() - 1;
        for entry in frame {
            let window = &self.history[t - entry.order..t];
            if entry.created_node {
                let removed = self.nodes.remove(window);
                debug_assert!(matches!(removed, Some(Node { total: 1, .. })));
                continue;
            }
            let node = self.nodes.get_mut(window).expect("counted context present");
            node.total -= 1;
            if entry.created_pair {
                node.counts.retain(|(s, _)| *s != symbol);
            } else {
                let slot = node
                    .counts
                    .iter_mut()
                    .find(|(s, _)| *s == symbol)
                    .expect("counted pair present");
                slot.1 -= 1;
            }
        }
        self.history.pop();
        Some(symbol)
    }

    /// Count of `context` followed by `symbol` among all sliding windows.
    pub fn count(&self, context: &[Symbol], symbol: Symbol) -> u64 {
        self.nodes
            .get(context)
            .map(|n| n.count(symbol) as u64)
            .unwrap_or(0)
    }

    /// Count of `context` followed by any symbol.
    pub fn total(&self, context: &[Symbol]) -> u64 {
        self.nodes.get(context).map(|n| n.total as u64).unwrap_or(0)
    }

    /// Count and total in one lookup; the hot path for conditionals.
    pub fn stats(&self, context: &[Symbol], symbol: Symbol) -> (u64, u64) {
        match self.nodes.get(context) {
            Some(n) => (n.count(symbol) as u64, n.total as u64),
            None => (0, 0),
        }
    }

    /// Ordered dump of every observed context with its per-symbol counts;
    /// used by tests to compare against a from-scratch recount.
    pub fn counts_snapshot(&self) -> BTreeMap<Vec<Symbol>, Vec<(Symbol, u64)>> {
        self.nodes
            .iter()
            .map(|(ctx, node)| {
                let mut counts: Vec<(Symbol, u64)> =
                    node.counts.iter().map(|&(s, c)| (s, c as u64)).collect();
                counts.sort_unstable();
                (ctx.to_vec(), counts)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn recount(history: &[Symbol], max_order: usize) -> BTreeMap<Vec<Symbol>, Vec<(Symbol, u64)>> {
        let mut map: BTreeMap<Vec<Symbol>, BTreeMap<Symbol, u64>> = BTreeMap::new();
        for t in 0..history.len() {
            for order in 0..=max_order.min(t) {
                let ctx = history[t - order..t].to_vec();
                *map.entry(ctx).or_default().entry(history[t]).or_default() += 1;
            }
        }
        map.into_iter()
            .map(|(ctx, counts)| (ctx, counts.into_iter().collect()))
            .collect()
    }

    #[test]
    fn first_symbol_updates_only_the_empty_context() {
        let mut tree = ContextTree::new(Alphabet::new(2).unwrap(), 2);
        tree.append(0).unwrap();
        assert_eq!(tree.count(&[], 0), 1);
        assert_eq!(tree.count(&[], 1), 0);
        assert_eq!(tree.total(&[0]), 0);
    }

    #[test]
    fn second_symbol_updates_order_one() {
        let mut tree = ContextTree::new(Alphabet::new(2).unwrap(), 2);
        tree.append(1).unwrap();
        tree.append(0).unwrap();
        assert_eq!(tree.count(&[], 0), 1);
        assert_eq!(tree.count(&[], 1), 1);
        assert_eq!(tree.count(&[1], 0), 1);
        assert_eq!(tree.total(&[1]), 1);
    }

    #[test]
    fn rejects_out_of_range_symbols() {
        let mut tree = ContextTree::new(Alphabet::new(2).unwrap(), 2);
        assert!(tree.append(2).is_err());
        assert_eq!(tree.len(), 0);
    }

    #[test]
    fn totals_are_sums_of_counts_per_context() {
        let mut tree = ContextTree::new(Alphabet::new(3).unwrap(), 3);
        for s in [0, 1, 2, 1, 0, 0, 2, 1, 1, 0] {
            tree.append(s).unwrap();
        }
        for (ctx, counts) in tree.counts_snapshot() {
            let sum: u64 = counts.iter().map(|(_, c)| c).sum();
            assert_eq!(tree.total(&ctx), sum);
        }
    }

    #[test]
    fn order_totals_conserve_window_count() {
        let history = [0u32, 1, 1, 0, 2, 1, 0, 0, 1, 2, 2, 0];
        let max_order = 4;
        let mut tree = ContextTree::new(Alphabet::new(3).unwrap(), max_order);
        for &s in &history {
            tree.append(s).unwrap();
        }
        let t = history.len();
        for order in 0..=max_order.min(t - 1) {
            let total: u64 = tree
                .counts_snapshot()
                .iter()
                .filter(|(ctx, _)| ctx.len() == order)
                .map(|(ctx, _)| tree.total(ctx))
                .sum();
            assert_eq!(total, (t - order) as u64, "order {order}");
        }
    }

    proptest! {
        #[test]
        fn append_then_rollback_restores_counts_exactly(
            prefix in proptest::collection::vec(0u32..3, 0..40),
            extra in proptest::collection::vec(0u32..3, 1..10),
            max_order in 0usize..5,
        ) {
            let alphabet = Alphabet::new(3).unwrap();
            let mut tree = ContextTree::new(alphabet, max_order);
            for &s in &prefix {
                tree.append(s).unwrap();
            }
            let before = tree.counts_snapshot();
            for &s in &extra {
                tree.append(s).unwrap();
            }
            prop_assert_eq!(tree.counts_snapshot(), recount(tree.history(), max_order));
            for _ in 0..extra.len() {
                tree.rollback();
            }
            prop_assert_eq!(tree.counts_snapshot(), before);
            prop_assert_eq!(tree.counts_snapshot(), recount(&prefix, max_order));
        }
    }
}
