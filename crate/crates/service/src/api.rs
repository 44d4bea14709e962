//! JSON wire types. Field order here is the order on the wire.

use std::collections::BTreeMap;

use chronoquery_core::{
    ColorAssignment, Criterion, DisplayColor, IngestReport, QueryMode, SegmentFilter, SortSpec,
};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QueryRequest {
    pub criterion: Criterion,
    pub mode: QueryMode,
    pub colors: ColorAssignment,
    #[serde(default)]
    pub filter: SegmentFilter,
    #[serde(default)]
    pub sort: SortSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentDto {
    pub start: usize,
    pub end: usize,
    pub color: DisplayColor,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseResult {
    pub id: String,
    pub name: String,
    pub category: String,
    pub segments: Vec<SegmentDto>,
    pub colored_lengths: BTreeMap<String, usize>,
    pub sort_key: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupDto {
    pub category: Option<String>,
    pub case_ids: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryResponse {
    pub dataset_id: String,
    pub timestep_count: usize,
    pub sort_color: String,
    pub groups: Vec<GroupDto>,
    pub cases: Vec<CaseResult>,
    /// Thresholds in criterion space: one curve, or lower then upper.
    pub threshold_curves: Vec<Vec<Option<f64>>>,
    /// For rank queries, each threshold mapped into original-value space
    /// (value of the n-th ranked case, n = floor(threshold)).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank_curves: Option<Vec<Vec<Option<f64>>>>,
    pub request: QueryRequest,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UploadResponse {
    pub dataset_id: String,
    pub report: IngestReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub dataset_id: String,
    pub case_count: usize,
    pub timestep_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseMeta {
    pub id: String,
    pub name: String,
    pub category: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub dataset_id: String,
    pub time_labels: Vec<String>,
    pub cases: Vec<CaseMeta>,
    pub categories: Vec<String>,
    pub case_count: usize,
    pub timestep_count: usize,
    pub missing_cell_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesDto {
    pub id: String,
    pub values: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesResponse {
    pub dataset_id: String,
    pub series: Vec<SeriesDto>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: String,
    pub message: String,
}
