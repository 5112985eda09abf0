//! Nested binary partitions of a real interval.
//!
//! Level `s` splits `[lo; hi]` into `2^s` equal bins; each level refines the
//! previous one by halving every bin, so the partition family is nested and
//! bin arithmetic is a single multiply and floor.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::logp::LogValue;
use crate::measure::{Alphabet, SymbolSequence};
use crate::num::Real;

/// Deepest partition level supported; bin indices stay within `u32`.
pub const HARD_LEVEL_CAP: u32 = 32;

/// A closed real interval `[lo; hi]` with `lo < hi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval<T> {
    lo: T,
    hi: T,
}

impl<T: Real> Interval<T> {
    pub fn new(lo: T, hi: T) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::BadInterval {
                lo: lo.to_f64().unwrap_or(f64::NAN),
                hi: hi.to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(Interval { lo, hi })
    }

    pub fn unit() -> Self {
        Interval {
            lo: T::zero(),
            hi: T::one(),
        }
    }

    /// Smallest interval containing `values`, expanded by `pad_fraction` of
    /// the spread on each side. A constant series gets a symmetric pad
    /// proportional to its magnitude so the interval stays non-degenerate.
    pub fn containing(values: &[T], pad_fraction: T) -> Result<Self> {
        let mut min = T::infinity();
        let mut max = T::neg_infinity();
        for &v in values {
            if !v.is_finite() {
                return Err(Error::BadSource("non-finite value in series".into()));
            }
            if v < min {
                min = v;
            }
            if v > max {
                max = v;
            }
        }
        if values.is_empty() {
            return Err(Error::EmptySequence);
        }
        let spread = max - min;
        let pad = if spread > T::zero() {
            pad_fraction * spread
        } else {
            let scale = if max.abs() > T::one() { max.abs() } else { T::one() };
            pad_fraction * scale
        };
        Interval::new(min - pad, max + pad)
    }

    pub fn lo(&self) -> T {
        self.lo
    }

    pub fn hi(&self) -> T {
        self.hi
    }

    pub fn width(&self) -> T {
        self.hi - self.lo
    }

    pub fn contains(&self, value: T) -> bool {
        value >= self.lo && value <= self.hi
    }

    pub fn check(&self, value: T) -> Result<()> {
        if self.contains(value) {
            Ok(())
        } else {
            Err(Error::ValueOutsideInterval {
                value: value.to_f64().unwrap_or(f64::NAN),
                lo: self.lo.to_f64().unwrap_or(f64::NAN),
                hi: self.hi.to_f64().unwrap_or(f64::NAN),
            })
        }
    }

    /// Affine map of `value` onto `[0; 1]`.
    pub fn normalize(&self, value: T) -> T {
        (value - self.lo) / self.width()
    }

    pub fn denormalize(&self, unit: T) -> T {
        self.lo + unit * self.width()
    }
}

/// The level-`s` partition of an interval into `2^s` equal bins.
///
/// Values on an interior bin boundary belong to the right (higher) bin; the
/// upper endpoint belongs to the last bin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quantizer<T> {
    interval: Interval<T>,
    level: u32,
}

impl<T: Real> Quantizer<T> {
    pub fn new(interval: Interval<T>, level: u32) -> Result<Self> {
        if level < 1 {
            return Err(Error::LevelTooSmall);
        }
        if level > HARD_LEVEL_CAP {
            return Err(Error::LevelTooLarge(level));
        }
        Ok(Quantizer { interval, level })
    }

    pub fn interval(&self) -> Interval<T> {
        self.interval
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn bin_count(&self) -> u64 {
        1u64 << self.level
    }

    pub fn bin_width(&self) -> T {
        self.interval.width() / T::from_count(self.bin_count())
    }

    /// Index of the bin containing `value`.
    pub fn bin_index(&self, value: T) -> Result<u32> {
        self.interval.check(value)?;
        let scaled = self.interval.normalize(value) * T::from_count(self.bin_count());
        let idx = scaled.floor().to_u64().unwrap_or(0);
        Ok(idx.min(self.bin_count() - 1) as u32)
    }

    pub fn bin_midpoint(&self, index: u32) -> T {
        self.interval.lo() + (T::from_count(index as u64) + T::half()) * self.bin_width()
    }

    /// Alphabet induced by the partition: one symbol per bin.
    pub fn alphabet(&self) -> Alphabet {
        Alphabet::new(self.bin_count() as usize).expect("2^level >= 2")
    }

    /// Maps a real series to its bin-index sequence.
    pub fn quantize_series(&self, values: &[T]) -> Result<SymbolSequence> {
        let mut seq = SymbolSequence::empty(self.alphabet());
        for &v in values {
            seq.push(self.bin_index(v)?)?;
        }
        Ok(seq)
    }
}

/// Outcome of the refinement stopping rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Resolution {
    pub level: u32,
    /// Set when no level up to the cap separated all distinct values.
    pub capped: bool,
}

/// Smallest level at which all distinct values fall into distinct bins.
///
/// Duplicated values do not force refinement; if even `max_level` cannot
/// separate the distinct values the cap is returned with `capped` set.
pub fn resolution_level<T: Real>(
    values: &[T],
    interval: Interval<T>,
    max_level: u32,
) -> Result<Resolution> {
    if values.is_empty() {
        return Err(Error::EmptySequence);
    }
    let mut distinct: Vec<T> = values.to_vec();
    for &v in &distinct {
        interval.check(v)?;
    }
    distinct.sort_by(|a, b| a.partial_cmp(b).expect("values are finite"));
    distinct.dedup_by(|a, b| a == b);
    if distinct.len() == 1 {
        return Ok(Resolution {
            level: 1,
            capped: false,
        });
    }
    for level in 1..=max_level.min(HARD_LEVEL_CAP) {
        let q = Quantizer::new(interval, level)?;
        let mut separated = true;
        let mut prev = q.bin_index(distinct[0])?;
        for &v in &distinct[1..] {
            let bin = q.bin_index(v)?;
            if bin == prev {
                separated = false;
                break;
            }
            prev = bin;
        }
        if separated {
            return Ok(Resolution {
                level,
                capped: false,
            });
        }
    }
    Ok(Resolution {
        level: max_level.min(HARD_LEVEL_CAP),
        capped: true,
    })
}

/// log2 of the Lebesgue factor for `count` values quantized at `level`:
/// all bins have equal width, so the product of bin lengths is a power.
pub fn lebesgue_log<T: Real>(level: u32, count: usize, interval: Interval<T>) -> Result<LogValue<T>> {
    if level < 1 {
        return Err(Error::LevelTooSmall);
    }
    let log2_width = interval.width().log2() - T::from_count(level as u64);
    Ok(LogValue::from_log2(T::from_count(count as u64) * log2_width))
}
