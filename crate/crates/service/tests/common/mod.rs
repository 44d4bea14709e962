//! Brute-force reference implementation of the query pipeline.
//!
//! Everything here works cell by cell straight from the definitions and
//! shares no code with the engine beyond reading the dataset and the wire
//! types it serializes into.

#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::PathBuf;

use chronoquery_core::{
    ColorAssignment, Criterion, Dataset, DisplayColor, Paint, QueryMode, ThresholdSpec,
};
use chronoquery_service::api::{CaseResult, GroupDto, QueryRequest, QueryResponse, SegmentDto};

pub fn fixtures_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

/// Competition rank by counting strictly larger values.
pub fn brute_rank(column: &[Option<f64>], c: usize) -> Option<f64> {
    let x = column[c]?;
    Some(1.0 + column.iter().flatten().filter(|y| **y > x).count() as f64)
}

/// Sort-then-assign ranking for one timestep.
pub fn sort_assign_ranks(column: &[Option<f64>]) -> Vec<Option<f64>> {
    let mut present: Vec<(f64, usize)> = column
        .iter()
        .enumerate()
        .filter_map(|(i, v)| v.map(|x| (x, i)))
        .collect();
    present.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    let mut out = vec![None; column.len()];
    let mut i = 0;
    while i < present.len() {
        let mut j = i;
        while j < present.len() && present[j].0 == present[i].0 {
            j += 1;
        }
        for k in i..j {
            out[present[k].1] = Some((i + 1) as f64);
        }
        i = j;
    }
    out
}

/// Textbook two-pass population variance of the present values in
/// `[t - h, t + h]` clipped to the series.
pub fn naive_variance(series: &[Option<f64>], t: usize, window: usize) -> Option<f64> {
    let h = (window - 1) / 2;
    let lo = t.saturating_sub(h);
    let hi = (t + h).min(series.len() - 1);
    let xs: Vec<f64> = series[lo..=hi].iter().flatten().copied().collect();
    if xs.is_empty() {
        return None;
    }
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    Some(xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / xs.len() as f64)
}

fn criterion_value(d: &Dataset, criterion: Criterion, c: usize, t: usize) -> Option<f64> {
    let v = &d.cases()[c].values;
    match criterion {
        Criterion::Value => v[t],
        Criterion::Rank => {
            let column: Vec<Option<f64>> = d.cases().iter().map(|k| k.values[t]).collect();
            brute_rank(&column, c)
        }
        Criterion::NetChange { delta } => {
            if t < delta {
                None
            } else {
                Some(v[t]? - v[t - delta]?)
            }
        }
        Criterion::PctChange { delta } => {
            if t < delta {
                return None;
            }
            let then = v[t - delta]?;
            if then == 0.0 {
                None
            } else {
                Some(100.0 * (v[t]? - then) / then.abs())
            }
        }
        Criterion::Variance { window } => naive_variance(v, t, window),
    }
}

fn threshold_at(d: &Dataset, spec: &ThresholdSpec, t: usize) -> Option<f64> {
    match spec {
        ThresholdSpec::Constant { value } => Some(*value),
        ThresholdSpec::AggregateOffset { offset } => {
            let xs: Vec<f64> = d.cases().iter().filter_map(|c| c.values[t]).collect();
            if xs.is_empty() {
                None
            } else {
                Some(xs.iter().sum::<f64>() / xs.len() as f64 + offset)
            }
        }
        ThresholdSpec::EgoOffset { ego_id, offset } => d
            .cases()
            .iter()
            .find(|c| &c.id == ego_id)
            .and_then(|c| c.values[t])
            .map(|x| x + offset),
    }
}

/// "low", "mid", "high" or "undefined" for one cell.
pub fn oracle_label(
    d: &Dataset,
    criterion: Criterion,
    mode: &QueryMode,
    c: usize,
    t: usize,
) -> &'static str {
    let Some(x) = criterion_value(d, criterion, c, t) else {
        return "undefined";
    };
    match mode {
        QueryMode::TwoRange { threshold } => match threshold_at(d, threshold, t) {
            None => "undefined",
            Some(th) if x <= th => "low",
            Some(_) => "high",
        },
        QueryMode::ThreeRange { lower, upper } => {
            match (threshold_at(d, lower, t), threshold_at(d, upper, t)) {
                (Some(l), Some(_)) if x <= l => "low",
                (Some(_), Some(u)) if x >= u => "high",
                (Some(_), Some(_)) => "mid",
                _ => "undefined",
            }
        }
    }
}

fn paint_of<'a>(colors: &'a ColorAssignment, label: &str) -> Option<&'a str> {
    let p = match label {
        "low" => &colors.low,
        "mid" => &colors.mid,
        "high" => &colors.high,
        _ => return None,
    };
    match p {
        Paint::Color(c) => Some(c.as_str()),
        _ => None,
    }
}

/// Per-timestep display colors after filtering (None = context).
pub fn oracle_paint_row(d: &Dataset, req: &QueryRequest, c: usize) -> Vec<Option<String>> {
    let len = d.len_t();
    let raw: Vec<Option<String>> = (0..len)
        .map(|t| {
            paint_of(&req.colors, oracle_label(d, req.criterion, &req.mode, c, t)).map(String::from)
        })
        .collect();
    (0..len)
        .map(|t| {
            raw[t].as_ref()?;
            let mut lo = t;
            while lo > 0 && raw[lo - 1] == raw[t] {
                lo -= 1;
            }
            let mut hi = t;
            while hi + 1 < len && raw[hi + 1] == raw[t] {
                hi += 1;
            }
            let run = hi - lo + 1;
            let ok = req.filter.min_len.is_none_or(|m| run >= m)
                && req.filter.max_len.is_none_or(|m| run <= m);
            if ok {
                raw[t].clone()
            } else {
                None
            }
        })
        .collect()
}

fn segments_of(row: &[Option<String>]) -> Vec<SegmentDto> {
    let mut out: Vec<SegmentDto> = Vec::new();
    let mut start = 0;
    for t in 1..=row.len() {
        if t == row.len() || row[t] != row[start] {
            out.push(SegmentDto {
                start,
                end: t - 1,
                color: match &row[start] {
                    Some(c) => DisplayColor::Color(c.clone()),
                    None => DisplayColor::Context,
                },
            });
            start = t;
        }
    }
    out
}

fn tokens(colors: &ColorAssignment) -> Vec<String> {
    let mut out = Vec::new();
    for p in [&colors.low, &colors.mid, &colors.high] {
        if let Paint::Color(c) = p {
            if !out.contains(c) {
                out.push(c.clone());
            }
        }
    }
    out
}

/// The full response, built from per-timestep counts and a comparison sort.
pub fn oracle_response(d: &Dataset, req: &QueryRequest) -> QueryResponse {
    let len = d.len_t();
    let toks = tokens(&req.colors);
    let sort_color = req.sort.color.clone().unwrap_or_else(|| toks[0].clone());
    let (w0, w1) = req
        .sort
        .window
        .map(|w| (w.start, w.end))
        .unwrap_or((0, len - 1));

    let mut cases: Vec<CaseResult> = Vec::new();
    for (c, case) in d.cases().iter().enumerate() {
        let row = oracle_paint_row(d, req, c);
        let colored_lengths: BTreeMap<String, usize> = toks
            .iter()
            .map(|tok| {
                (
                    tok.clone(),
                    row.iter().filter(|p| p.as_deref() == Some(tok)).count(),
                )
            })
            .collect();
        if req.sort.hide_uncolored && colored_lengths.values().all(|n| *n == 0) {
            continue;
        }
        let sort_key = (w0..=w1)
            .filter(|t| row[*t].as_deref() == Some(sort_color.as_str()))
            .count();
        cases.push(CaseResult {
            id: case.id.clone(),
            name: case.name.clone(),
            category: case.category_name().to_string(),
            segments: segments_of(&row),
            colored_lengths,
            sort_key,
        });
    }

    let groups = if req.sort.group_mode {
        let mut cats: Vec<String> = cases.iter().map(|c| c.category.clone()).collect();
        cats.sort();
        cats.dedup();
        let mean = |cat: &str| {
            let keys: Vec<usize> = cases
                .iter()
                .filter(|c| c.category == cat)
                .map(|c| c.sort_key)
                .collect();
            keys.iter().sum::<usize>() as f64 / keys.len() as f64
        };
        cats.sort_by(|a, b| mean(b).partial_cmp(&mean(a)).unwrap().then(a.cmp(b)));
        cases.sort_by(|a, b| {
            let ga = cats.iter().position(|c| *c == a.category).unwrap();
            let gb = cats.iter().position(|c| *c == b.category).unwrap();
            ga.cmp(&gb)
                .then(b.sort_key.cmp(&a.sort_key))
                .then(a.id.cmp(&b.id))
        });
        cats.iter()
            .map(|cat| GroupDto {
                category: Some(cat.clone()),
                case_ids: cases
                    .iter()
                    .filter(|c| &c.category == cat)
                    .map(|c| c.id.clone())
                    .collect(),
            })
            .collect()
    } else {
        cases.sort_by(|a, b| b.sort_key.cmp(&a.sort_key).then(a.id.cmp(&b.id)));
        vec![GroupDto {
            category: None,
            case_ids: cases.iter().map(|c| c.id.clone()).collect(),
        }]
    };

    let specs: Vec<&ThresholdSpec> = match &req.mode {
        QueryMode::TwoRange { threshold } => vec![threshold],
        QueryMode::ThreeRange { lower, upper } => vec![lower, upper],
    };
    let threshold_curves = specs
        .iter()
        .map(|s| (0..len).map(|t| threshold_at(d, s, t)).collect())
        .collect();
    let rank_curves = (req.criterion == Criterion::Rank).then(|| {
        specs
            .iter()
            .map(|s| {
                let n = match s {
                    ThresholdSpec::Constant { value } if *value >= 1.0 => value.floor() as usize,
                    _ => 0,
                };
                (0..len)
                    .map(|t| {
                        let mut xs: Vec<f64> =
                            d.cases().iter().filter_map(|c| c.values[t]).collect();
                        xs.sort_by(|a, b| b.partial_cmp(a).unwrap());
                        if n == 0 || xs.len() < n {
                            None
                        } else {
                            Some(xs[n - 1])
                        }
                    })
                    .collect()
            })
            .collect()
    });

    let mut echo = req.clone();
    echo.sort.color = Some(sort_color.clone());
    QueryResponse {
        dataset_id: d.id().to_string(),
        timestep_count: len,
        sort_color,
        groups,
        cases,
        threshold_curves,
        rank_curves,
        request: echo,
    }
}
