//! Report assembly: JSON documents carrying the full resolved configuration,
//! plus the CSV tables printed for evaluation and comparison runs.

use serde::{Deserialize, Serialize};

use uniforecast_core::eval::{EvaluationReport, ExperimentPlan};
use uniforecast_core::forecast::ForecastConfig;

use crate::ingest::Dataset;

/// Everything needed to rerun a command byte-for-byte; embedded in every
/// report and round-trips losslessly through JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub input: String,
    pub column: String,
    pub horizon: usize,
    pub seed: Option<u64>,
    pub forecast: ForecastConfig<f64>,
    pub plan: Option<ExperimentPlan>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DatasetInfo {
    pub name: String,
    pub observations: usize,
    pub rows_dropped: usize,
    pub provenance: String,
    pub range_lo: f64,
    pub range_hi: f64,
}

impl DatasetInfo {
    pub fn new(dataset: &Dataset) -> Self {
        let lo = dataset.values.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = dataset
            .values
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max);
        DatasetInfo {
            name: dataset.name.clone(),
            observations: dataset.rows_parsed,
            rows_dropped: dataset.rows_dropped,
            provenance: dataset.provenance.clone(),
            range_lo: lo,
            range_hi: hi,
        }
    }
}

/// Output of the `forecast` command: the point forecasts plus the score grid
/// of the first step.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ForecastReport {
    pub config: RunConfig,
    pub dataset: DatasetInfo,
    pub points: Vec<f64>,
    pub ties_broken: bool,
    pub finest_level: u32,
    pub finest_bin_width: f64,
    pub resolution_capped: bool,
    /// Candidate grid of the first step with conditional densities.
    pub scores: Vec<(f64, f64)>,
}

/// Output of the `evaluate` command.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvaluateReport {
    pub config: RunConfig,
    pub dataset: DatasetInfo,
    pub report: EvaluationReport<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CompareRow {
    pub method: String,
    pub mae: Vec<f64>,
}

/// Output of the `compare` command: method-versus-baseline MAE per column.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CompareReport {
    pub title: String,
    pub config: RunConfig,
    pub dataset: DatasetInfo,
    pub columns: Vec<String>,
    pub rows: Vec<CompareRow>,
    pub report: EvaluationReport<f64>,
}

fn fmt(v: f64) -> String {
    format!("{v}")
}

/// One-row table in the layout of the per-series MAE summaries: name and
/// range first, then the adaptive column, then one column per length.
pub fn evaluate_table(dataset: &DatasetInfo, report: &EvaluationReport<f64>) -> String {
    let mut header = vec![
        "series".to_string(),
        "range_lo".to_string(),
        "range_hi".to_string(),
        "adaptive".to_string(),
    ];
    let mut row = vec![
        dataset.name.clone(),
        fmt(dataset.range_lo),
        fmt(dataset.range_hi),
    ];
    let adaptive = report
        .configurations
        .iter()
        .find(|c| c.length.is_none())
        .map(|c| fmt(c.mae))
        .unwrap_or_else(|| "n/d".to_string());
    row.push(adaptive);
    for config in report.configurations.iter().filter(|c| c.length.is_some()) {
        header.push(config.length.unwrap().to_string());
        row.push(fmt(config.mae));
    }
    format!("{}\n{}\n", header.join(","), row.join(","))
}

/// Two-method-row table: the universal forecaster against its baseline, one
/// column per configuration, identical target indices throughout.
pub fn compare_table(report: &EvaluationReport<f64>) -> (String, Vec<String>, Vec<CompareRow>) {
    let title = format!("Comparison with the {} method", report.baseline);
    let mut columns = Vec::new();
    let mut method = Vec::new();
    let mut baseline = Vec::new();
    for config in &report.configurations {
        columns.push(match config.length {
            Some(len) => len.to_string(),
            None => "adaptive".to_string(),
        });
        method.push(config.mae);
        baseline.push(config.baseline_mae);
    }
    let rows = vec![
        CompareRow {
            method: "universal".to_string(),
            mae: method,
        },
        CompareRow {
            method: report.baseline.clone(),
            mae: baseline,
        },
    ];
    (title, columns, rows)
}

pub fn compare_table_csv(columns: &[String], rows: &[CompareRow]) -> String {
    let mut out = String::new();
    out.push_str("method,");
    out.push_str(&columns.join(","));
    out.push('\n');
    for row in rows {
        out.push_str(&row.method);
        for v in &row.mae {
            out.push(',');
            out.push_str(&fmt(*v));
        }
        out.push('\n');
    }
    out
}
