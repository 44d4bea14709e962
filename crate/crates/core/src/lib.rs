//! Query engine for "which and when" questions over collections of
//! univariate time series.
//!
//! A [`Dataset`] is classified cell by cell against a threshold (or a pair
//! of thresholds) on either the original values or a derived series such as
//! per-timestep rank. The resulting label rows are run-length segmented,
//! colored, filtered and sorted into the order the timeline views display.
//!
//! ```
//! use chronoquery_core::{
//!     classify, organize, ColorAssignment, Criterion, DataCase, Dataset, Paint, QueryMode,
//!     QuerySpec, SegmentFilter, SortSpec, ThresholdSpec, TimeAxis,
//! };
//!
//! let axis = TimeAxis::new(["2000", "2001"]).unwrap();
//! let data = Dataset::new(
//!     "demo",
//!     axis,
//!     vec![
//!         DataCase::new("A", vec![Some(48.0), Some(52.0)]),
//!         DataCase::new("B", vec![Some(61.0), Some(63.0)]),
//!     ],
//! )
//! .unwrap();
//! let query = QuerySpec {
//!     criterion: Criterion::Value,
//!     mode: QueryMode::TwoRange { threshold: ThresholdSpec::constant(50.0) },
//! };
//! let labels = classify(&data, &query).unwrap();
//! let colors = ColorAssignment { low: Paint::color("red"), ..Default::default() };
//! let sort = SortSpec { hide_uncolored: true, ..Default::default() };
//! let result =
//!     organize(&data, &labels, &query.mode, &colors, &SegmentFilter::default(), &sort).unwrap();
//! assert_eq!(result.cases.len(), 1);
//! assert_eq!(result.cases[0].case_id, "A");
//! ```

pub mod derived;
pub mod error;
pub mod ingest;
pub mod model;
pub mod organize;
pub mod query;

pub use derived::{
    compute_aggregate_series, compute_net_change, compute_pct_change, compute_rank_matrix,
    compute_windowed_variance, derive, ego_series, Criterion, DerivedMatrix,
};
pub use error::{DeriveError, IngestError, ModelError, OrganizeError, QueryError};
pub use ingest::{load_dataset_file, parse_wide_csv, to_wide_csv, IngestOptions, IngestReport};
pub use model::{DataCase, Dataset, TimeAxis, IMPLICIT_CATEGORY};
pub use organize::{
    apply_colors_and_filter, colored_length, organize, sort_cases, CaseDisplay, ColorAssignment,
    DisplayColor, DisplaySegment, Group, OrganizedCase, OrganizedResult, Paint, SegmentFilter,
    SortSpec, TimeWindow,
};
pub use query::{
    classify, rank_threshold_curve, resolve_threshold, segment_labels, LabelMatrix, QueryMode,
    QuerySpec, RangeLabel, Segment, ThresholdSpec,
};
