use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("time axis must have at least one timestep")]
    EmptyAxis,
    #[error("duplicate time label {0:?}")]
    DuplicateLabel(String),
    #[error("unknown time label {0:?}")]
    UnknownLabel(String),
    #[error("dataset must contain at least one case")]
    NoCases,
    #[error("duplicate case id {0:?}")]
    DuplicateCaseId(String),
    #[error("unknown case id {0:?}")]
    UnknownCase(String),
    #[error("timestep index {t} out of range for axis of length {len}")]
    IndexOutOfRange { t: usize, len: usize },
    #[error("case {case_id:?} has {actual} values, expected {expected}")]
    LengthMismatch {
        case_id: String,
        expected: usize,
        actual: usize,
    },
    #[error("case {case_id:?} holds a non-finite value at timestep {t}")]
    NonFiniteValue { case_id: String, t: usize },
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("input is empty")]
    Empty,
    #[error("input is not valid UTF-8")]
    NotUtf8,
    #[error("malformed CSV: {0}")]
    Csv(String),
    #[error("header must contain an id column and at least one time column")]
    MissingTimeColumns,
    #[error("row {row} has {actual} fields, header has {expected}")]
    RaggedRow {
        row: usize,
        expected: usize,
        actual: usize,
    },
    #[error("non-numeric cell {value:?} at row {row}, column {column:?}")]
    NonNumericCell {
        row: usize,
        column: String,
        value: String,
    },
    #[error("empty case id at row {row}")]
    EmptyId { row: usize },
    #[error("duplicate case id {id:?} at row {row}")]
    DuplicateCaseId { row: usize, id: String },
    #[error("duplicate time label {0:?}")]
    DuplicateLabel(String),
    #[error("no data rows")]
    NoDataRows,
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Model(#[from] ModelError),
}

impl IngestError {
    /// Stable machine-readable tag.
    pub fn code(&self) -> &'static str {
        match self {
            IngestError::Empty => "empty-input",
            IngestError::NotUtf8 => "not-utf8",
            IngestError::Csv(_) => "malformed-csv",
            IngestError::MissingTimeColumns => "missing-time-columns",
            IngestError::RaggedRow { .. } => "ragged-rows",
            IngestError::NonNumericCell { .. } => "non-numeric-cell",
            IngestError::EmptyId { .. } => "empty-id",
            IngestError::DuplicateCaseId { .. } => "duplicate-case-id",
            IngestError::DuplicateLabel(_) => "duplicate-time-label",
            IngestError::NoDataRows => "no-data-rows",
            IngestError::Io { .. } => "io",
            IngestError::Model(_) => "invalid-dataset",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DeriveError {
    #[error("delta {delta} out of range: must satisfy 1 <= delta < {len}")]
    DeltaOutOfRange { delta: usize, len: usize },
    #[error("variance window {window} invalid: must be odd and between 1 and {len}")]
    BadWindow { window: usize, len: usize },
    #[error("unknown ego case {0:?}")]
    UnknownEgo(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QueryError {
    #[error(transparent)]
    Derive(#[from] DeriveError),
    #[error("threshold must be a finite number")]
    NonFiniteThreshold,
    #[error("variable thresholds are only valid with the value criterion")]
    VariableThresholdCriterion,
    #[error("lower threshold exceeds upper threshold at timestep {t}")]
    CrossedThresholds { t: usize },
    #[error("rank threshold count must be at least 1")]
    RankCountZero,
}

impl QueryError {
    pub fn code(&self) -> &'static str {
        match self {
            QueryError::Derive(DeriveError::DeltaOutOfRange { .. }) => "bad-delta",
            QueryError::Derive(DeriveError::BadWindow { .. }) => "bad-window",
            QueryError::Derive(DeriveError::UnknownEgo(_)) => "unknown-ego",
            QueryError::NonFiniteThreshold => "non-finite-threshold",
            QueryError::VariableThresholdCriterion => "invalid-criterion",
            QueryError::CrossedThresholds { .. } => "crossed-thresholds",
            QueryError::RankCountZero => "bad-rank-count",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OrganizeError {
    #[error("no range is assigned a color")]
    NoColorAssigned,
    #[error("color token must be non-empty and not a reserved name, got {0:?}")]
    BadColorToken(String),
    #[error("range {0} is not produced by this query mode")]
    LabelNotInMode(&'static str),
    #[error("segment filter min_len {min} exceeds max_len {max}")]
    FilterBounds { min: usize, max: usize },
    #[error("segment filter lengths must be positive")]
    FilterZero,
    #[error("time window [{start}, {end}] invalid for axis of length {len}")]
    BadTimeWindow {
        start: usize,
        end: usize,
        len: usize,
    },
    #[error("sort color {0:?} is not assigned to any range")]
    UnassignedSortColor(String),
}

impl OrganizeError {
    pub fn code(&self) -> &'static str {
        match self {
            OrganizeError::NoColorAssigned => "no-color-assigned",
            OrganizeError::BadColorToken(_) => "bad-color-token",
            OrganizeError::LabelNotInMode(_) => "label-not-in-mode",
            OrganizeError::FilterBounds { .. } | OrganizeError::FilterZero => "bad-filter",
            OrganizeError::BadTimeWindow { .. } => "bad-window",
            OrganizeError::UnassignedSortColor(_) => "unassigned-sort-color",
        }
    }
}
