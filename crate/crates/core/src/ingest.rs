//! Wide-format CSV ingestion: one row per case, one column per timestep.
//!
//! ```text
//! id[,category],t0,t1,...
//! SWE,Europe,55.0,55.9,...
//! ```
//!
//! Empty cells are missing values. Numbers are plain decimals with an
//! optional sign and exponent.

use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::IngestError;
use crate::model::{DataCase, Dataset, TimeAxis};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IngestOptions {
    pub has_category_column: bool,
    pub dataset_id: String,
}

impl Default for IngestOptions {
    fn default() -> Self {
        Self {
            has_category_column: false,
            dataset_id: "dataset".to_string(),
        }
    }
}

impl IngestOptions {
    pub fn with_categories(mut self, yes: bool) -> Self {
        self.has_category_column = yes;
        self
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.dataset_id = id.into();
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestReport {
    pub case_count: usize,
    pub timestep_count: usize,
    pub missing_cell_count: usize,
    pub category_count: usize,
    pub warnings: Vec<String>,
}

pub fn parse_wide_csv(
    bytes: &[u8],
    options: &IngestOptions,
) -> Result<(Dataset, IngestReport), IngestError> {
    if bytes.iter().all(u8::is_ascii_whitespace) {
        return Err(IngestError::Empty);
    }
    let text = std::str::from_utf8(bytes).map_err(|_| IngestError::NotUtf8)?;
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);

    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut records = reader.records();

    let header = match records.next() {
        Some(r) => r.map_err(|e| IngestError::Csv(e.to_string()))?,
        None => return Err(IngestError::Empty),
    };
    let leading = if options.has_category_column { 2 } else { 1 };
    if header.len() <= leading {
        return Err(IngestError::MissingTimeColumns);
    }
    let labels: Vec<String> = header
        .iter()
        .skip(leading)
        .map(|s| s.trim().to_string())
        .collect();
    let axis = TimeAxis::new(labels.iter().cloned()).map_err(|e| match e {
        crate::error::ModelError::DuplicateLabel(l) => IngestError::DuplicateLabel(l),
        other => IngestError::Model(other),
    })?;

    let mut cases = Vec::new();
    let mut seen = HashSet::new();
    let mut warnings = Vec::new();
    let mut missing = 0usize;

    for (i, record) in records.enumerate() {
        let row = i + 1;
        let record = record.map_err(|e| IngestError::Csv(e.to_string()))?;
        if record.len() != header.len() {
            return Err(IngestError::RaggedRow {
                row,
                expected: header.len(),
                actual: record.len(),
            });
        }
        let id = record[0].trim();
        if id.is_empty() {
            return Err(IngestError::EmptyId { row });
        }
        if !seen.insert(id.to_string()) {
            return Err(IngestError::DuplicateCaseId {
                row,
                id: id.to_string(),
            });
        }
        let mut case = DataCase::new(id, Vec::with_capacity(axis.len()));
        if options.has_category_column {
            let cat = record[1].trim();
            if cat.is_empty() {
                warnings.push(format!("case {id:?} has an empty category"));
            } else {
                case.category = Some(cat.to_string());
            }
        }
        for (cell, label) in record.iter().skip(leading).zip(&labels) {
            let value = parse_cell(cell).ok_or_else(|| IngestError::NonNumericCell {
                row,
                column: label.clone(),
                value: cell.to_string(),
            })?;
            if value.is_none() {
                missing += 1;
            }
            case.values.push(value);
        }
        if case.values.iter().all(Option::is_none) {
            warnings.push(format!("case {id:?} has no values"));
        }
        cases.push(case);
    }

    if cases.is_empty() {
        return Err(IngestError::NoDataRows);
    }
    let dataset = Dataset::new(options.dataset_id.clone(), axis, cases)?;
    let report = IngestReport {
        case_count: dataset.cases().len(),
        timestep_count: dataset.len_t(),
        missing_cell_count: missing,
        category_count: dataset.categories().len(),
        warnings,
    };
    Ok((dataset, report))
}

/// `Some(None)` for an empty cell, `None` when the cell is not a number.
fn parse_cell(cell: &str) -> Option<Option<f64>> {
    let s = cell.trim();
    if s.is_empty() {
        return Some(None);
    }
    // f64::from_str also accepts "inf", "NaN" and friends.
    let plausible = s.bytes().any(|b| b.is_ascii_digit())
        && s.bytes()
            .all(|b| b.is_ascii_digit() || matches!(b, b'+' | b'-' | b'.' | b'e' | b'E'));
    if !plausible {
        return None;
    }
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() => Some(Some(v)),
        _ => None,
    }
}

pub fn load_dataset_file(
    path: impl AsRef<Path>,
    options: &IngestOptions,
) -> Result<(Dataset, IngestReport), IngestError> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_wide_csv(&bytes, options)
}

/// Writes a dataset back out in the wide format accepted by [`parse_wide_csv`].
pub fn to_wide_csv(dataset: &Dataset, include_category: bool) -> String {
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let mut header = vec!["id".to_string()];
    if include_category {
        header.push("category".to_string());
    }
    header.extend(dataset.axis().labels().iter().cloned());
    writer.write_record(&header).expect("write to Vec");
    for case in dataset.cases() {
        let mut row = vec![case.id.clone()];
        if include_category {
            row.push(case.category.clone().unwrap_or_default());
        }
        row.extend(
            case.values
                .iter()
                .map(|v| v.map(|x| x.to_string()).unwrap_or_default()),
        );
        writer.write_record(&row).expect("write to Vec");
    }
    let bytes = writer.into_inner().expect("flush to Vec");
    String::from_utf8(bytes).expect("csv output is UTF-8")
}
