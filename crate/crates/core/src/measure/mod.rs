//! Finite-alphabet universal measures.
//!
//! Builds up from occurrence counting ([`ContextTree`]) through the
//! per-order Krichevsky–Trofimov estimator ([`kt`]) to the order mixture
//! ([`mixture`]) that weights every Markov order by the telescoping prior
//! ([`weights`]) and is a consistent probability estimate for any stationary
//! ergodic finite-alphabet source.

mod context;
mod kt;
mod mixture;
mod weights;

pub use context::ContextTree;
pub use kt::{kt_block_log, kt_conditional};
pub use mixture::{empirical_log_loss, mixture_conditional, mixture_measure_log, MeasureState};
pub use weights::{telescoping_tail, telescoping_weight};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Symbol index into a finite alphabet.
pub type Symbol = u32;

/// A finite alphabet; symbols are the indices `0..size`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Alphabet {
    size: usize,
}

impl Alphabet {
    pub fn new(size: usize) -> Result<Self> {
        if size < 2 {
            return Err(Error::AlphabetTooSmall(size));
        }
        Ok(Alphabet { size })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn contains(&self, symbol: Symbol) -> bool {
        (symbol as usize) < self.size
    }

    pub fn check(&self, symbol: Symbol) -> Result<()> {
        if self.contains(symbol) {
            Ok(())
        } else {
            Err(Error::SymbolOutOfRange {
                symbol,
                alphabet_size: self.size,
            })
        }
    }

    pub fn symbols(&self) -> impl Iterator<Item = Symbol> {
        0..self.size as Symbol
    }
}

/// A finite string over a finite alphabet.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolSequence {
    symbols: Vec<Symbol>,
    alphabet: Alphabet,
}

impl SymbolSequence {
    pub fn new(symbols: Vec<Symbol>, alphabet: Alphabet) -> Result<Self> {
        for &s in &symbols {
            alphabet.check(s)?;
        }
        Ok(SymbolSequence { symbols, alphabet })
    }

    pub fn empty(alphabet: Alphabet) -> Self {
        SymbolSequence {
            symbols: Vec::new(),
            alphabet,
        }
    }

    /// Parses a string of decimal digits; handy for binary and ternary tests.
    pub fn from_digits(digits: &str, alphabet: Alphabet) -> Result<Self> {
        let symbols = digits
            .chars()
            .map(|c| c.to_digit(10).map(|d| d as Symbol).ok_or(Error::BadSource(format!("non-digit {c:?}"))))
            .collect::<Result<Vec<_>>>()?;
        Self::new(symbols, alphabet)
    }

    pub fn push(&mut self, symbol: Symbol) -> Result<()> {
        self.alphabet.check(symbol)?;
        self.symbols.push(symbol);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }
}

/// Truncation policy for the infinite order mixture.
///
/// Orders `0..=max_order` are carried explicitly; the residual prior mass
/// beyond `max_order` attaches to the deepest order so the mixture stays a
/// probability measure. With `exact_tail` set and a sequence short enough
/// that every order at or beyond its length is in play (`t <= max_order + 1`),
/// the tail collapses analytically and the mixture value is exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MixtureConfig {
    pub max_order: usize,
    pub exact_tail: bool,
}

impl Default for MixtureConfig {
    fn default() -> Self {
        MixtureConfig {
            max_order: 32,
            exact_tail: true,
        }
    }
}

impl MixtureConfig {
    pub fn with_max_order(max_order: usize) -> Self {
        MixtureConfig {
            max_order,
            ..Default::default()
        }
    }
}
