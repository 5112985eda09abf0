use thiserror::Error;

/// Errors surfaced by the measure, density, forecasting and evaluation layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("symbol {symbol} out of range for alphabet of size {alphabet_size}")]
    SymbolOutOfRange { symbol: u32, alphabet_size: usize },

    #[error("alphabet must have at least two symbols, got {0}")]
    AlphabetTooSmall(usize),

    #[error("operation requires a non-empty sequence")]
    EmptySequence,

    #[error("interval requires lo < hi, got [{lo}; {hi}]")]
    BadInterval { lo: f64, hi: f64 },

    #[error("value {value} outside interval [{lo}; {hi}]")]
    ValueOutsideInterval { value: f64, lo: f64, hi: f64 },

    #[error("quantizer level must be at least 1")]
    LevelTooSmall,

    #[error("quantizer level {0} exceeds the supported maximum of {max}", max = crate::quantize::HARD_LEVEL_CAP)]
    LevelTooLarge(u32),

    #[error("window sizes must be distinct, non-empty and at most the series length {len}; offending size {size}")]
    BadWindow { size: usize, len: usize },

    #[error("series too short: need at least {need} values, got {got}")]
    InsufficientHistory { need: usize, got: usize },

    #[error("grid step must be positive and smaller than the interval width")]
    BadGridStep,

    #[error("invalid plan: {}", .0.join("; "))]
    InvalidPlan(Vec<String>),

    #[error("baseline column data required by the plan was not provided")]
    MissingBaselineColumn,

    #[error("{0}")]
    BadSource(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
