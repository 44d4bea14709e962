//! The stateless query pipeline shared by the HTTP handler and the CLI.

use chronoquery_core::{
    classify, organize, rank_threshold_curve, Criterion, Dataset, OrganizedResult, QuerySpec,
    ThresholdSpec,
};

use crate::api::{CaseResult, GroupDto, QueryRequest, QueryResponse, SegmentDto};
use crate::error::ApiError;

/// derive, resolve thresholds, classify, segment, color, filter, sort.
pub fn run_query(dataset: &Dataset, request: &QueryRequest) -> Result<QueryResponse, ApiError> {
    let spec = QuerySpec {
        criterion: request.criterion,
        mode: request.mode.clone(),
    };
    let labels = classify(dataset, &spec)?;
    let organized = organize(
        dataset,
        &labels,
        &spec.mode,
        &request.colors,
        &request.filter,
        &request.sort,
    )?;

    let rank_curves = match request.criterion {
        Criterion::Rank => Some(
            spec.mode
                .thresholds()
                .into_iter()
                .map(|t| rank_value_curve(dataset, t))
                .collect(),
        ),
        _ => None,
    };

    let mut echo = request.clone();
    echo.sort.color = Some(organized.sort_color.clone());
    Ok(to_response(dataset, organized, rank_curves, echo))
}

fn rank_value_curve(dataset: &Dataset, threshold: &ThresholdSpec) -> Vec<Option<f64>> {
    let n = match threshold {
        ThresholdSpec::Constant { value } if *value >= 1.0 => value.floor() as usize,
        _ => 0,
    };
    rank_threshold_curve(dataset, n).unwrap_or_else(|_| vec![None; dataset.len_t()])
}

fn to_response(
    dataset: &Dataset,
    organized: OrganizedResult,
    rank_curves: Option<Vec<Vec<Option<f64>>>>,
    request: QueryRequest,
) -> QueryResponse {
    let groups = organized
        .groups
        .into_iter()
        .map(|g| GroupDto {
            category: g.category,
            case_ids: g.case_ids,
        })
        .collect();
    let cases = organized
        .cases
        .into_iter()
        .map(|c| {
            let name = dataset
                .case(&c.case_id)
                .map(|d| d.name.clone())
                .unwrap_or_else(|_| c.case_id.clone());
            CaseResult {
                name,
                id: c.case_id,
                category: c.category,
                segments: c
                    .segments
                    .into_iter()
                    .map(|s| SegmentDto {
                        start: s.start,
                        end: s.end,
                        color: s.color,
                    })
                    .collect(),
                colored_lengths: c.colored_lengths,
                sort_key: c.sort_key,
            }
        })
        .collect();
    QueryResponse {
        dataset_id: dataset.id().to_string(),
        timestep_count: dataset.len_t(),
        sort_color: organized.sort_color,
        groups,
        cases,
        threshold_curves: organized.thresholds,
        rank_curves,
        request,
    }
}
