//! Support library of the `uniforecast` binary: CSV ingestion and report
//! types. Kept as a library so the data contracts are testable directly.

pub mod ingest;
pub mod report;
