//! Threshold resolution, per-cell range classification and run-length
//! segmentation of label rows.
//!
//! Boundary convention: `Low` is inclusive of its threshold (`x <= θ`).
//! In a two-range query everything above θ is `High`; in a three-range
//! query `High` is inclusive of the upper threshold (`x >= U`) and `Mid`
//! is the open interval between the two.

use serde::{Deserialize, Serialize};

use crate::derived::{compute_aggregate_series, derive, ego_series, Criterion};
use crate::error::QueryError;
use crate::model::Dataset;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ThresholdSpec {
    Constant { value: f64 },
    AggregateOffset { offset: f64 },
    EgoOffset { ego_id: String, offset: f64 },
}

impl ThresholdSpec {
    pub fn constant(value: f64) -> Self {
        ThresholdSpec::Constant { value }
    }

    pub fn is_variable(&self) -> bool {
        !matches!(self, ThresholdSpec::Constant { .. })
    }

    fn number(&self) -> f64 {
        match self {
            ThresholdSpec::Constant { value } => *value,
            ThresholdSpec::AggregateOffset { offset } | ThresholdSpec::EgoOffset { offset, .. } => {
                *offset
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum QueryMode {
    TwoRange {
        threshold: ThresholdSpec,
    },
    ThreeRange {
        lower: ThresholdSpec,
        upper: ThresholdSpec,
    },
}

impl QueryMode {
    pub fn thresholds(&self) -> Vec<&ThresholdSpec> {
        match self {
            QueryMode::TwoRange { threshold } => vec![threshold],
            QueryMode::ThreeRange { lower, upper } => vec![lower, upper],
        }
    }

    /// The labels a query in this mode can assign, besides `Undefined`.
    pub fn labels(&self) -> &'static [RangeLabel] {
        match self {
            QueryMode::TwoRange { .. } => &[RangeLabel::Low, RangeLabel::High],
            QueryMode::ThreeRange { .. } => &[RangeLabel::Low, RangeLabel::Mid, RangeLabel::High],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuerySpec {
    pub criterion: Criterion,
    pub mode: QueryMode,
}

impl QuerySpec {
    pub fn validate(&self, dataset: &Dataset) -> Result<(), QueryError> {
        self.criterion.validate(dataset.len_t())?;
        for spec in self.mode.thresholds() {
            if !spec.number().is_finite() {
                return Err(QueryError::NonFiniteThreshold);
            }
            if spec.is_variable() && self.criterion != Criterion::Value {
                return Err(QueryError::VariableThresholdCriterion);
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RangeLabel {
    Low,
    Mid,
    High,
    Undefined,
}

impl RangeLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            RangeLabel::Low => "low",
            RangeLabel::Mid => "mid",
            RangeLabel::High => "high",
            RangeLabel::Undefined => "undefined",
        }
    }
}

/// Labels for every case and timestep, plus the threshold curves that
/// produced them (one for two-range queries, lower then upper otherwise).
#[derive(Debug, Clone, PartialEq)]
pub struct LabelMatrix {
    pub labels: Vec<Vec<RangeLabel>>,
    pub thresholds: Vec<Vec<Option<f64>>>,
}

/// A maximal run of one label in one case, inclusive at both ends.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Segment {
    pub case_id: String,
    pub start: usize,
    pub end: usize,
    pub label: RangeLabel,
}

#[allow(clippy::len_without_is_empty)]
impl Segment {
    pub fn len(&self) -> usize {
        self.end - self.start + 1
    }
}

pub fn resolve_threshold(
    dataset: &Dataset,
    spec: &ThresholdSpec,
) -> Result<Vec<Option<f64>>, QueryError> {
    let curve = match spec {
        ThresholdSpec::Constant { value } => vec![Some(*value); dataset.len_t()],
        ThresholdSpec::AggregateOffset { offset } => {
            shift(compute_aggregate_series(dataset), *offset)
        }
        ThresholdSpec::EgoOffset { ego_id, offset } => shift(ego_series(dataset, ego_id)?, *offset),
    };
    Ok(curve)
}

fn shift(series: Vec<Option<f64>>, offset: f64) -> Vec<Option<f64>> {
    series.into_iter().map(|v| v.map(|x| x + offset)).collect()
}

/// The original-value curve for a "rank <= n" query: at each timestep, the
/// n-th largest present value, so that a case ranks within the top n
/// exactly when its value is at least the curve.
pub fn rank_threshold_curve(dataset: &Dataset, n: usize) -> Result<Vec<Option<f64>>, QueryError> {
    if n == 0 {
        return Err(QueryError::RankCountZero);
    }
    let mut column = Vec::with_capacity(dataset.cases().len());
    Ok((0..dataset.len_t())
        .map(|t| {
            column.clear();
            column.extend(dataset.column(t).flatten());
            if column.len() < n {
                return None;
            }
            let (_, nth, _) = column.select_nth_unstable_by(n - 1, |a, b| b.total_cmp(a));
            Some(*nth)
        })
        .collect())
}

pub fn classify(dataset: &Dataset, query: &QuerySpec) -> Result<LabelMatrix, QueryError> {
    query.validate(dataset)?;
    let derived = derive(dataset, query.criterion)?;
    let thresholds = query
        .mode
        .thresholds()
        .into_iter()
        .map(|spec| resolve_threshold(dataset, spec))
        .collect::<Result<Vec<_>, _>>()?;

    if let [lower, upper] = thresholds.as_slice() {
        if let Some(t) = lower
            .iter()
            .zip(upper)
            .position(|(l, u)| matches!((l, u), (Some(l), Some(u)) if l > u))
        {
            return Err(QueryError::CrossedThresholds { t });
        }
    }

    let labels = derived
        .values
        .iter()
        .map(|row| {
            row.iter()
                .enumerate()
                .map(|(t, x)| label_cell(*x, &thresholds, t))
                .collect()
        })
        .collect();
    Ok(LabelMatrix { labels, thresholds })
}

fn label_cell(x: Option<f64>, thresholds: &[Vec<Option<f64>>], t: usize) -> RangeLabel {
    let Some(x) = x else {
        return RangeLabel::Undefined;
    };
    match thresholds {
        [theta] => match theta[t] {
            Some(theta) if x <= theta => RangeLabel::Low,
            Some(_) => RangeLabel::High,
            None => RangeLabel::Undefined,
        },
        [lower, upper] => match (lower[t], upper[t]) {
            (Some(l), Some(_)) if x <= l => RangeLabel::Low,
            (Some(_), Some(u)) if x >= u => RangeLabel::High,
            (Some(_), Some(_)) => RangeLabel::Mid,
            _ => RangeLabel::Undefined,
        },
        _ => unreachable!("a query has one or two thresholds"),
    }
}

/// Maximal runs of equal items as inclusive `(start, end, item)` triples.
pub fn runs<T: PartialEq + Clone>(row: &[T]) -> Vec<(usize, usize, T)> {
    let mut out: Vec<(usize, usize, T)> = Vec::new();
    for (t, item) in row.iter().enumerate() {
        match out.last_mut() {
            Some(last) if last.2 == *item => last.1 = t,
            _ => out.push((t, t, item.clone())),
        }
    }
    out
}

pub fn segment_labels(case_id: &str, labels: &[RangeLabel]) -> Vec<Segment> {
    runs(labels)
        .into_iter()
        .map(|(start, end, label)| Segment {
            case_id: case_id.to_string(),
            start,
            end,
            label,
        })
        .collect()
}

impl LabelMatrix {
    /// Segments for every case, in dataset case order.
    pub fn segments(&self, dataset: &Dataset) -> Vec<Vec<Segment>> {
        dataset
            .cases()
            .iter()
            .zip(&self.labels)
            .map(|(case, row)| segment_labels(&case.id, row))
            .collect()
    }
}
