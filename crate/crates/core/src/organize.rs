//! Turns a label matrix into what the timeline views draw: ranges mapped to
//! colors, segment-length filtering, colored-length sorting and category
//! grouping.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::OrganizeError;
use crate::model::Dataset;
use crate::query::{runs, LabelMatrix, QueryMode, RangeLabel};

const CONTEXT: &str = "context";
const HIDDEN: &str = "hidden";

/// How one range is shown. `Hidden` draws like `Context` but never counts
/// as a colored result.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(from = "String", into = "String")]
pub enum Paint {
    Color(String),
    #[default]
    Context,
    Hidden,
}

impl From<String> for Paint {
    fn from(s: String) -> Self {
        match s.as_str() {
            CONTEXT => Paint::Context,
            HIDDEN => Paint::Hidden,
            _ => Paint::Color(s),
        }
    }
}

impl From<Paint> for String {
    fn from(p: Paint) -> Self {
        match p {
            Paint::Color(c) => c,
            Paint::Context => CONTEXT.to_string(),
            Paint::Hidden => HIDDEN.to_string(),
        }
    }
}

impl Paint {
    pub fn color(token: impl Into<String>) -> Self {
        Paint::Color(token.into())
    }
}

/// What a display segment is drawn with.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "String", into = "String")]
pub enum DisplayColor {
    Color(String),
    Context,
}

impl From<String> for DisplayColor {
    fn from(s: String) -> Self {
        if s == CONTEXT {
            DisplayColor::Context
        } else {
            DisplayColor::Color(s)
        }
    }
}

impl From<DisplayColor> for String {
    fn from(c: DisplayColor) -> Self {
        match c {
            DisplayColor::Color(c) => c,
            DisplayColor::Context => CONTEXT.to_string(),
        }
    }
}

impl fmt::Display for DisplayColor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DisplayColor::Color(c) => f.write_str(c),
            DisplayColor::Context => f.write_str(CONTEXT),
        }
    }
}

/// Range to paint mapping. `Undefined` cells are always context.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ColorAssignment {
    #[serde(default)]
    pub low: Paint,
    #[serde(default)]
    pub mid: Paint,
    #[serde(default)]
    pub high: Paint,
}

impl ColorAssignment {
    pub fn paint(&self, label: RangeLabel) -> &Paint {
        match label {
            RangeLabel::Low => &self.low,
            RangeLabel::Mid => &self.mid,
            RangeLabel::High => &self.high,
            RangeLabel::Undefined => &Paint::Context,
        }
    }

    fn display(&self, label: RangeLabel) -> DisplayColor {
        match self.paint(label) {
            Paint::Color(c) => DisplayColor::Color(c.clone()),
            Paint::Context | Paint::Hidden => DisplayColor::Context,
        }
    }

    /// Distinct color tokens in Low, Mid, High order.
    pub fn tokens(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for paint in [&self.low, &self.mid, &self.high] {
            if let Paint::Color(c) = paint {
                if !out.contains(&c.as_str()) {
                    out.push(c);
                }
            }
        }
        out
    }

    pub fn validate(&self, mode: &QueryMode) -> Result<(), OrganizeError> {
        for paint in [&self.low, &self.mid, &self.high] {
            if let Paint::Color(c) = paint {
                if c.trim().is_empty() || c == CONTEXT || c == HIDDEN {
                    return Err(OrganizeError::BadColorToken(c.clone()));
                }
            }
        }
        if matches!(mode, QueryMode::TwoRange { .. }) && self.mid != Paint::Context {
            return Err(OrganizeError::LabelNotInMode("mid"));
        }
        if self.tokens().is_empty() {
            return Err(OrganizeError::NoColorAssigned);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentFilter {
    #[serde(default)]
    pub min_len: Option<usize>,
    #[serde(default)]
    pub max_len: Option<usize>,
}

impl SegmentFilter {
    pub fn validate(&self) -> Result<(), OrganizeError> {
        if self.min_len == Some(0) || self.max_len == Some(0) {
            return Err(OrganizeError::FilterZero);
        }
        if let (Some(min), Some(max)) = (self.min_len, self.max_len) {
            if min > max {
                return Err(OrganizeError::FilterBounds { min, max });
            }
        }
        Ok(())
    }

    fn keeps(&self, len: usize) -> bool {
        self.min_len.is_none_or(|m| len >= m) && self.max_len.is_none_or(|m| len <= m)
    }
}

/// Inclusive timestep range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimeWindow {
    pub start: usize,
    pub end: usize,
}

impl TimeWindow {
    pub fn new(start: usize, end: usize) -> Self {
        Self { start, end }
    }

    pub fn validate(&self, len: usize) -> Result<(), OrganizeError> {
        if self.start <= self.end && self.end < len {
            Ok(())
        } else {
            Err(OrganizeError::BadTimeWindow {
                start: self.start,
                end: self.end,
                len,
            })
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SortSpec {
    /// Defaults to the first assigned color token.
    #[serde(default)]
    pub color: Option<String>,
    #[serde(default)]
    pub window: Option<TimeWindow>,
    #[serde(default)]
    pub group_mode: bool,
    #[serde(default)]
    pub hide_uncolored: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DisplaySegment {
    pub start: usize,
    pub end: usize,
    pub color: DisplayColor,
}

impl DisplaySegment {
    pub fn len(&self) -> usize {
        self.end - self.start + 1
    }

    pub fn is_empty(&self) -> bool {
        self.end < self.start
    }
}

/// One case's timeline after coloring and filtering.
#[derive(Debug, Clone, PartialEq)]
pub struct CaseDisplay {
    pub case_id: String,
    pub category: String,
    pub segments: Vec<DisplaySegment>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrganizedCase {
    pub case_id: String,
    pub category: String,
    pub segments: Vec<DisplaySegment>,
    /// Full-axis colored length per assigned color token.
    pub colored_lengths: BTreeMap<String, usize>,
    /// Colored length of the sort color inside the sort window.
    pub sort_key: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Group {
    /// `None` when group mode is off.
    pub category: Option<String>,
    pub case_ids: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrganizedResult {
    pub groups: Vec<Group>,
    /// Visible cases in display order.
    pub cases: Vec<OrganizedCase>,
    pub sort_color: String,
    pub thresholds: Vec<Vec<Option<f64>>>,
}

/// Maps label segments through `colors`, merges equal neighbours, demotes
/// colored runs whose length falls outside `filter` to context, and merges
/// again so the result is maximal.
pub fn apply_colors_and_filter(
    dataset: &Dataset,
    labels: &LabelMatrix,
    colors: &ColorAssignment,
    filter: &SegmentFilter,
) -> Vec<CaseDisplay> {
    dataset
        .cases()
        .iter()
        .zip(&labels.labels)
        .map(|(case, row)| {
            let painted: Vec<DisplayColor> = row.iter().map(|l| colors.display(*l)).collect();
            CaseDisplay {
                case_id: case.id.clone(),
                category: case.category_name().to_string(),
                segments: filter_segments(&painted, filter),
            }
        })
        .collect()
}

fn filter_segments(painted: &[DisplayColor], filter: &SegmentFilter) -> Vec<DisplaySegment> {
    let mut kept: Vec<DisplaySegment> = Vec::new();
    for (start, end, color) in runs(painted) {
        let color = match color {
            DisplayColor::Color(_) if !filter.keeps(end - start + 1) => DisplayColor::Context,
            c => c,
        };
        match kept.last_mut() {
            Some(last) if last.color == color => last.end = end,
            _ => kept.push(DisplaySegment { start, end, color }),
        }
    }
    kept
}

/// Timesteps covered by segments of `color`, restricted to `window`.
pub fn colored_length(
    segments: &[DisplaySegment],
    color: &str,
    window: Option<TimeWindow>,
) -> usize {
    segments
        .iter()
        .filter(|s| matches!(&s.color, DisplayColor::Color(c) if c == color))
        .map(|s| match window {
            None => s.len(),
            Some(w) => {
                let lo = s.start.max(w.start);
                let hi = s.end.min(w.end);
                if lo <= hi {
                    hi - lo + 1
                } else {
                    0
                }
            }
        })
        .sum()
}

/// Orders cases by descending colored length of the sort color, ties by
/// case id. In group mode, categories come first, ordered by descending
/// mean key over their visible members, ties by name.
pub fn sort_cases(
    cases: Vec<CaseDisplay>,
    colors: &ColorAssignment,
    sort: &SortSpec,
    len_t: usize,
) -> Result<OrganizedResult, OrganizeError> {
    let tokens = colors.tokens();
    let sort_color = match &sort.color {
        Some(c) if tokens.contains(&c.as_str()) => c.clone(),
        Some(c) => return Err(OrganizeError::UnassignedSortColor(c.clone())),
        None => tokens
            .first()
            .map(|c| c.to_string())
            .ok_or(OrganizeError::NoColorAssigned)?,
    };
    if let Some(w) = sort.window {
        w.validate(len_t)?;
    }

    let mut visible: Vec<OrganizedCase> = cases
        .into_iter()
        .map(|c| {
            let colored_lengths: BTreeMap<String, usize> = tokens
                .iter()
                .map(|t| (t.to_string(), colored_length(&c.segments, t, None)))
                .collect();
            let sort_key = colored_length(&c.segments, &sort_color, sort.window);
            OrganizedCase {
                case_id: c.case_id,
                category: c.category,
                segments: c.segments,
                colored_lengths,
                sort_key,
            }
        })
        .filter(|c| !sort.hide_uncolored || c.colored_lengths.values().any(|n| *n > 0))
        .collect();

    let by_key = |a: &OrganizedCase, b: &OrganizedCase| {
        b.sort_key
            .cmp(&a.sort_key)
            .then_with(|| a.case_id.cmp(&b.case_id))
    };

    let groups = if sort.group_mode {
        let mut by_category: BTreeMap<String, Vec<OrganizedCase>> = BTreeMap::new();
        for case in visible.drain(..) {
            by_category
                .entry(case.category.clone())
                .or_default()
                .push(case);
        }
        let mut blocks: Vec<(String, u64, u64, Vec<OrganizedCase>)> = by_category
            .into_iter()
            .map(|(name, mut members)| {
                members.sort_by(by_key);
                let sum = members.iter().map(|c| c.sort_key as u64).sum();
                (name, sum, members.len() as u64, members)
            })
            .collect();
        // mean a > mean b  <=>  sum_a * n_b > sum_b * n_a, exact in integers
        blocks.sort_by(|a, b| {
            (u128::from(b.1) * u128::from(a.2))
                .cmp(&(u128::from(a.1) * u128::from(b.2)))
                .then_with(|| a.0.cmp(&b.0))
        });
        let mut groups = Vec::with_capacity(blocks.len());
        for (name, _, _, members) in blocks {
            groups.push(Group {
                category: Some(name),
                case_ids: members.iter().map(|c| c.case_id.clone()).collect(),
            });
            visible.extend(members);
        }
        groups
    } else {
        visible.sort_by(by_key);
        vec![Group {
            category: None,
            case_ids: visible.iter().map(|c| c.case_id.clone()).collect(),
        }]
    };

    Ok(OrganizedResult {
        groups,
        cases: visible,
        sort_color,
        thresholds: Vec::new(),
    })
}

/// Coloring, filtering and sorting in one call; threshold curves are carried
/// over from `labels`.
pub fn organize(
    dataset: &Dataset,
    labels: &LabelMatrix,
    mode: &QueryMode,
    colors: &ColorAssignment,
    filter: &SegmentFilter,
    sort: &SortSpec,
) -> Result<OrganizedResult, OrganizeError> {
    colors.validate(mode)?;
    filter.validate()?;
    let displays = apply_colors_and_filter(dataset, labels, colors, filter);
    let mut result = sort_cases(displays, colors, sort, dataset.len_t())?;
    result.thresholds = labels.thresholds.clone();
    Ok(result)
}

impl OrganizedResult {
    /// Category means of the sort key, in group order.
    pub fn group_means(&self) -> Vec<f64> {
        let keys: BTreeMap<&str, usize> = self
            .cases
            .iter()
            .map(|c| (c.case_id.as_str(), c.sort_key))
            .collect();
        self.groups
            .iter()
            .map(|g| {
                let sum: usize = g.case_ids.iter().map(|id| keys[id.as_str()]).sum();
                sum as f64 / g.case_ids.len().max(1) as f64
            })
            .collect()
    }
}
