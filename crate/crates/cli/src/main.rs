//! Command-line surface of the universal-measure forecaster.
//!
//! Three subcommands: `forecast` emits point forecasts and the candidate
//! score grid, `evaluate` runs the rolling-origin experiment grid, and
//! `compare` additionally lays the results out against the baseline. Exit
//! codes: 0 success, 2 configuration error, 3 data error, 4 runtime failure.

use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use uniforecast_core::density::{DensityConfig, LevelPolicy, WeightMode, WindowSpec};
use uniforecast_core::error::Error as CoreError;
use uniforecast_core::eval::{run_evaluation, BaselineSpec, EvalMode, ExperimentPlan};
use uniforecast_core::forecast::{forecast_multi, forecast_one, ForecastConfig, Transform};
use uniforecast_core::measure::MixtureConfig;
use uniforecast_core::quantize::Interval;

use uniforecast::ingest::{ingest_csv, ColumnSelector, IngestError};
use uniforecast::report::{
    compare_table, compare_table_csv, evaluate_table, CompareReport, DatasetInfo, EvaluateReport,
    ForecastReport, RunConfig,
};

#[derive(Parser)]
#[command(
    name = "uniforecast",
    version,
    about = "Time-series forecasting with universal measures"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Forecast the next value(s) of a series
    Forecast(ForecastArgs),
    /// Run rolling-origin experiments and report MAE per configuration
    Evaluate(EvaluateArgs),
    /// Evaluate and lay the results out against the baseline
    Compare(EvaluateArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TransformArg {
    None,
    Diff,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum WeightModeArg {
    Telescoping,
    Equiprobable,
}

#[derive(Args)]
struct CommonArgs {
    /// Input CSV file
    #[arg(long)]
    input: PathBuf,

    /// Column to read: zero-based index or header name
    #[arg(long, default_value = "0")]
    column: String,

    /// Value interval override as LO:HI (derived from the data when absent)
    #[arg(long)]
    range: Option<String>,

    /// Candidate grid step on the normalized scale
    #[arg(long, default_value_t = 0.01)]
    grid_step: f64,

    /// Comma-separated window sizes enabling the adaptive mixture
    #[arg(long)]
    windows: Option<String>,

    /// Weighting of the window mixture
    #[arg(long, value_enum, default_value_t = WeightModeArg::Equiprobable)]
    weight_mode: WeightModeArg,

    /// Deepest Markov order entering the measure mixture
    #[arg(long, default_value_t = 32)]
    max_order: usize,

    /// Cap on the partition refinement level
    #[arg(long, default_value_t = 20)]
    max_level: u32,

    /// Preparatory transform
    #[arg(long, value_enum, default_value_t = TransformArg::None)]
    transform: TransformArg,

    /// Score candidates in original units instead of the normalized scale
    #[arg(long)]
    no_normalize: bool,

    /// Drop rows with empty or non-numeric cells instead of failing
    #[arg(long)]
    drop_missing: bool,

    /// Seed recorded in reports (and used by any randomized component)
    #[arg(long)]
    seed: Option<u64>,

    /// Write the JSON report here
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ForecastArgs {
    #[command(flatten)]
    common: CommonArgs,

    /// Number of recursive one-step forecasts
    #[arg(long, default_value_t = 1)]
    horizon: usize,
}

#[derive(Args)]
struct EvaluateArgs {
    #[command(flatten)]
    common: CommonArgs,

    /// Comma-separated history lengths, one configuration per entry
    #[arg(long)]
    lengths: String,

    /// Also run the adaptive window mixture over all listed lengths
    #[arg(long)]
    adaptive: bool,

    /// Rolling origins per configuration
    #[arg(long, default_value_t = 10)]
    experiments: usize,

    /// Distance between consecutive rolling origins
    #[arg(long, default_value_t = 1)]
    stride: usize,

    /// Horizon above one switches to recursive multi-step experiments
    #[arg(long, default_value_t = 1)]
    horizon: usize,

    /// Baseline: "inertial" or "column:NAME"
    #[arg(long, default_value = "inertial")]
    baseline: String,

    /// Write the CSV table here (it always goes to stdout too)
    #[arg(long)]
    table: Option<PathBuf>,
}

enum CliError {
    Config(Vec<String>),
    Data(String),
    Runtime(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Data(_) => 3,
            CliError::Runtime(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(problems) => write!(f, "invalid configuration: {}", problems.join("; ")),
            CliError::Data(msg) => write!(f, "data error: {msg}"),
            CliError::Runtime(msg) => write!(f, "runtime failure: {msg}"),
        }
    }
}

impl From<IngestError> for CliError {
    fn from(e: IngestError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::InvalidPlan(problems) => CliError::Config(problems),
            CoreError::BadGridStep
            | CoreError::BadInterval { .. }
            | CoreError::BadWindow { .. }
            | CoreError::LevelTooSmall
            | CoreError::LevelTooLarge(_)
            | CoreError::AlphabetTooSmall(_)
            | CoreError::ValueOutsideInterval { .. } => CliError::Config(vec![e.to_string()]),
            CoreError::EmptySequence | CoreError::InsufficientHistory { .. } => {
                CliError::Data(e.to_string())
            }
            other => CliError::Runtime(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

fn main() -> ExitCode {
    init_thread_pool();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Forecast(args) => cmd_forecast(args),
        Command::Evaluate(args) => cmd_evaluate(args, false),
        Command::Compare(args) => cmd_evaluate(args, true),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

/// UF_THREADS caps the rayon pool; unset or invalid leaves the default.
fn init_thread_pool() {
    if let Ok(spec) = std::env::var("UF_THREADS") {
        if let Ok(n) = spec.trim().parse::<usize>() {
            if n > 0 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
        }
    }
}

fn parse_range(spec: &str, problems: &mut Vec<String>) -> Option<Interval<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let parsed = if parts.len() == 2 {
        match (parts[0].parse::<f64>(), parts[1].parse::<f64>()) {
            (Ok(lo), Ok(hi)) => Interval::new(lo, hi).ok(),
            _ => None,
        }
    } else {
        None
    };
    if parsed.is_none() {
        problems.push(format!("--range must be LO:HI with LO < HI, got {spec:?}"));
    }
    parsed
}

fn parse_usize_list(spec: &str, flag: &str, problems: &mut Vec<String>) -> Vec<usize> {
    let mut out = Vec::new();
    for part in spec.split(',') {
        match part.trim().parse::<usize>() {
            Ok(v) if v > 0 => out.push(v),
            _ => {
                problems.push(format!("{flag} expects positive integers, got {part:?}"));
                return Vec::new();
            }
        }
    }
    if out.is_empty() {
        problems.push(format!("{flag} must not be empty"));
    }
    out
}

fn parse_baseline(spec: &str, problems: &mut Vec<String>) -> BaselineSpec {
    if spec == "inertial" {
        return BaselineSpec::Inertial;
    }
    if let Some(name) = spec.strip_prefix("column:") {
        if !name.is_empty() {
            return BaselineSpec::ExternalColumn {
                name: name.to_string(),
            };
        }
    }
    problems.push(format!(
        "--baseline must be \"inertial\" or \"column:NAME\", got {spec:?}"
    ));
    BaselineSpec::Inertial
}

/// Builds the forecast configuration, collecting every violated constraint.
fn build_forecast_config(args: &CommonArgs, problems: &mut Vec<String>) -> ForecastConfig<f64> {
    if !(args.grid_step > 0.0 && args.grid_step.is_finite()) {
        problems.push(format!("--grid-step must be positive, got {}", args.grid_step));
    }
    if !args.no_normalize && args.grid_step >= 1.0 {
        problems.push(format!(
            "--grid-step must be below 1 on the normalized scale, got {}",
            args.grid_step
        ));
    }
    if args.max_level < 1 || args.max_level > 32 {
        problems.push(format!("--max-level must be in 1..=32, got {}", args.max_level));
    }
    let interval = args.range.as_deref().and_then(|spec| parse_range(spec, problems));
    let windows = args.windows.as_deref().map(|spec| {
        let sizes = parse_usize_list(spec, "--windows", problems);
        WindowSpec {
            sizes,
            weight_mode: match args.weight_mode {
                WeightModeArg::Telescoping => WeightMode::Telescoping,
                WeightModeArg::Equiprobable => WeightMode::Equiprobable,
            },
        }
    });
    ForecastConfig {
        grid_step: args.grid_step,
        windows,
        density: DensityConfig {
            max_level: args.max_level.clamp(1, 32),
            mixture: MixtureConfig {
                max_order: args.max_order,
                exact_tail: true,
            },
            level_policy: LevelPolicy::Auto,
        },
        transform: match args.transform {
            TransformArg::None => Transform::None,
            TransformArg::Diff => Transform::Difference,
        },
        normalize: !args.no_normalize,
        interval,
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Runtime(format!("serializing report: {e}")))?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

fn cmd_forecast(args: ForecastArgs) -> Result<(), CliError> {
    let mut problems = Vec::new();
    if args.horizon < 1 {
        problems.push("--horizon must be at least 1".to_string());
    }
    let cfg = build_forecast_config(&args.common, &mut problems);
    if !problems.is_empty() {
        return Err(CliError::Config(problems));
    }

    let selector = ColumnSelector::parse(&args.common.column);
    let (dataset, _) = ingest_csv(&args.common.input, &selector, None, args.common.drop_missing)?;
    eprintln!(
        "parsed {} rows ({} dropped) from {}",
        dataset.rows_parsed, dataset.rows_dropped, dataset.provenance
    );

    let first = forecast_one(&dataset.values, &cfg)?;
    let points = if args.horizon == 1 {
        vec![first.point]
    } else {
        forecast_multi(&dataset.values, args.horizon, &cfg)?
    };
    for p in &points {
        println!("{p}");
    }

    if let Some(path) = &args.common.output {
        let report = ForecastReport {
            config: run_config(&args.common, args.horizon, None),
            dataset: DatasetInfo::new(&dataset),
            points,
            ties_broken: first.ties_broken,
            finest_level: first.finest_level,
            finest_bin_width: first.finest_bin_width,
            resolution_capped: first.resolution_capped,
            scores: first.scores,
        };
        write_json(path, &report)?;
    }
    Ok(())
}

fn run_config(args: &CommonArgs, horizon: usize, plan: Option<&ExperimentPlan>) -> RunConfig {
    let mut problems = Vec::new();
    RunConfig {
        input: args.input.display().to_string(),
        column: args.column.clone(),
        horizon,
        seed: args.seed,
        forecast: build_forecast_config(args, &mut problems),
        plan: plan.cloned(),
    }
}

fn cmd_evaluate(args: EvaluateArgs, comparison: bool) -> Result<(), CliError> {
    let mut problems = Vec::new();
    let cfg = build_forecast_config(&args.common, &mut problems);
    let lengths = parse_usize_list(&args.lengths, "--lengths", &mut problems);
    let baseline = parse_baseline(&args.baseline, &mut problems);
    if args.experiments < 1 {
        problems.push("--experiments must be at least 1".to_string());
    }
    if args.stride < 1 {
        problems.push("--stride must be at least 1".to_string());
    }
    if args.horizon < 1 {
        problems.push("--horizon must be at least 1".to_string());
    }
    if !problems.is_empty() {
        return Err(CliError::Config(problems));
    }

    let plan = ExperimentPlan {
        lengths,
        adaptive: args.adaptive,
        adaptive_weight_mode: match args.common.weight_mode {
            WeightModeArg::Telescoping => WeightMode::Telescoping,
            WeightModeArg::Equiprobable => WeightMode::Equiprobable,
        },
        experiments: args.experiments,
        stride: args.stride,
        mode: if args.horizon > 1 {
            EvalMode::Recursive {
                horizon: args.horizon,
            }
        } else {
            EvalMode::OneStep
        },
        baseline: baseline.clone(),
    };

    let selector = ColumnSelector::parse(&args.common.column);
    let baseline_selector = match &baseline {
        BaselineSpec::ExternalColumn { name } => Some(ColumnSelector::parse(name)),
        BaselineSpec::Inertial => None,
    };
    let (dataset, residuals) = ingest_csv(
        &args.common.input,
        &selector,
        baseline_selector.as_ref(),
        args.common.drop_missing,
    )?;
    eprintln!(
        "parsed {} rows ({} dropped) from {}",
        dataset.rows_parsed, dataset.rows_dropped, dataset.provenance
    );

    let report = run_evaluation(
        &dataset.values,
        &dataset.name,
        &plan,
        &cfg,
        residuals.as_deref(),
    )?;
    let info = DatasetInfo::new(&dataset);

    let table = if comparison {
        let (title, columns, rows) = compare_table(&report);
        let csv = compare_table_csv(&columns, &rows);
        println!("{title}");
        print!("{csv}");
        if let Some(path) = &args.common.output {
            write_json(
                path,
                &CompareReport {
                    title,
                    config: run_config(&args.common, args.horizon, Some(&plan)),
                    dataset: info,
                    columns,
                    rows,
                    report,
                },
            )?;
        }
        csv
    } else {
        let csv = evaluate_table(&info, &report);
        print!("{csv}");
        if let Some(path) = &args.common.output {
            write_json(
                path,
                &EvaluateReport {
                    config: run_config(&args.common, args.horizon, Some(&plan)),
                    dataset: info,
                    report,
                },
            )?;
        }
        csv
    };

    if let Some(path) = &args.table {
        std::fs::write(path, table)?;
    }
    Ok(())
}
