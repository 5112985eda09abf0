//! CSV ingestion: one numeric series per selected column, strict about bad
//! cells unless told to drop them.

use std::fmt;
use std::path::Path;

/// Column selection: a zero-based index, or a header name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ColumnSelector {
    Index(usize),
    Name(String),
}

impl ColumnSelector {
    pub fn parse(spec: &str) -> Self {
        match spec.parse::<usize>() {
            Ok(idx) => ColumnSelector::Index(idx),
            Err(_) => ColumnSelector::Name(spec.to_string()),
        }
    }
}

impl fmt::Display for ColumnSelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ColumnSelector::Index(i) => write!(f, "column {i}"),
            ColumnSelector::Name(n) => write!(f, "column '{n}'"),
        }
    }
}

#[derive(Debug)]
pub enum IngestError {
    Unreadable(String),
    MissingColumn(String),
    BadCell { line: usize, content: String },
    EmptySelection,
}

impl fmt::Display for IngestError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IngestError::Unreadable(msg) => write!(f, "cannot read input: {msg}"),
            IngestError::MissingColumn(sel) => write!(f, "no such column: {sel}"),
            IngestError::BadCell { line, content } => {
                write!(f, "non-numeric cell {content:?} at line {line} (use --drop-missing to skip)")
            }
            IngestError::EmptySelection => write!(f, "selection produced no numeric rows"),
        }
    }
}

impl std::error::Error for IngestError {}

/// A parsed numeric series with its ingestion bookkeeping.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub name: String,
    pub values: Vec<f64>,
    pub rows_parsed: usize,
    pub rows_dropped: usize,
    pub provenance: String,
}

/// Reads the selected column, and optionally a second aligned column (for an
/// external-baseline residual series). Rows are kept in file order; a row is
/// dropped (or rejected without `drop_missing`) when any requested cell is
/// empty or non-numeric, so the two columns stay aligned.
pub fn ingest_csv(
    path: &Path,
    selector: &ColumnSelector,
    extra: Option<&ColumnSelector>,
    drop_missing: bool,
) -> Result<(Dataset, Option<Vec<f64>>), IngestError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| IngestError::Unreadable(format!("{}: {e}", path.display())))?;

    let mut records = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| IngestError::Unreadable(e.to_string()))?;
        records.push(record);
    }
    if records.is_empty() {
        return Err(IngestError::EmptySelection);
    }

    // a header row exists when a name selector is used, or when the first
    // row's selected cell does not parse as a number
    let header_by_name = matches!(selector, ColumnSelector::Name(_))
        || matches!(extra, Some(ColumnSelector::Name(_)));
    let resolve = |sel: &ColumnSelector, header: Option<&csv::StringRecord>| -> Result<usize, IngestError> {
        match sel {
            ColumnSelector::Index(i) => Ok(*i),
            ColumnSelector::Name(name) => header
                .and_then(|h| h.iter().position(|cell| cell == name))
                .ok_or_else(|| IngestError::MissingColumn(sel.to_string())),
        }
    };

    let (has_header, main_idx, extra_idx) = if header_by_name {
        let header = &records[0];
        let main = resolve(selector, Some(header))?;
        let ex = extra.map(|s| resolve(s, Some(header))).transpose()?;
        (true, main, ex)
    } else {
        let main = resolve(selector, None)?;
        let ex = extra.map(|s| resolve(s, None)).transpose()?;
        let first_parses = records[0]
            .get(main)
            .map(|c| c.parse::<f64>().map(|v| v.is_finite()).unwrap_or(false))
            .unwrap_or(false);
        (!first_parses, main, ex)
    };

    let data_rows = if has_header { &records[1..] } else { &records[..] };
    let mut values = Vec::with_capacity(data_rows.len());
    let mut extra_values = extra_idx.map(|_| Vec::with_capacity(data_rows.len()));
    let mut dropped = 0usize;
    for (row, record) in data_rows.iter().enumerate() {
        let line = row + 1 + if has_header { 1 } else { 0 };
        let parse_cell = |idx: usize| -> Result<Option<f64>, IngestError> {
            let cell = record.get(idx).unwrap_or("");
            match cell.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(Some(v)),
                _ if drop_missing => Ok(None),
                _ => Err(IngestError::BadCell {
                    line,
                    content: cell.to_string(),
                }),
            }
        };
        let main = parse_cell(main_idx)?;
        let ex = match extra_idx {
            Some(idx) => parse_cell(idx)?,
            None => Some(0.0),
        };
        match (main, ex) {
            (Some(v), Some(e)) => {
                values.push(v);
                if let Some(extras) = extra_values.as_mut() {
                    extras.push(e);
                }
            }
            _ => dropped += 1,
        }
    }

    if values.is_empty() {
        return Err(IngestError::EmptySelection);
    }
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().to_string())
        .unwrap_or_else(|| path.display().to_string());
    let dataset = Dataset {
        name: format!("{stem}:{selector}"),
        rows_parsed: values.len(),
        rows_dropped: dropped,
        provenance: format!("{} ({selector})", path.display()),
        values,
    };
    Ok((dataset, extra_values))
}
