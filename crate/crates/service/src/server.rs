//! HTTP routes.

use std::collections::HashMap;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{DefaultBodyLimit, Path, Query, State};
use axum::http::StatusCode;
use axum::response::IntoResponse;
use axum::routing::{get, post};
use axum::{Json, Router};
use chronoquery_core::{parse_wide_csv, Dataset, IngestOptions};
use serde::Deserialize;

use crate::api::{
    CaseMeta, DatasetMeta, DatasetSummary, QueryRequest, SeriesDto, SeriesResponse, UploadResponse,
};
use crate::error::ApiError;
use crate::pipeline::run_query;
use crate::registry::Registry;

pub const DEFAULT_BODY_LIMIT: usize = 16 * 1024 * 1024;

#[derive(Debug, Clone)]
pub struct AppState {
    pub registry: Arc<Registry>,
}

pub fn router(registry: Arc<Registry>) -> Router {
    router_with_limit(registry, DEFAULT_BODY_LIMIT)
}

pub fn router_with_limit(registry: Arc<Registry>, body_limit: usize) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/datasets", get(list_datasets).post(upload_dataset))
        .route("/datasets/{id}", get(dataset_meta))
        .route("/datasets/{id}/series", get(dataset_series))
        .route("/datasets/{id}/query", post(query_dataset))
        .layer(DefaultBodyLimit::max(body_limit))
        .with_state(AppState { registry })
}

async fn health() -> Json<serde_json::Value> {
    Json(serde_json::json!({ "status": "ok" }))
}

fn lookup(state: &AppState, id: &str) -> Result<Arc<Dataset>, ApiError> {
    state
        .registry
        .get(id)
        .ok_or_else(|| ApiError::not_found(format!("unknown dataset {id:?}")))
}

async fn list_datasets(State(state): State<AppState>) -> Json<Vec<DatasetSummary>> {
    Json(
        state
            .registry
            .list()
            .iter()
            .map(|d| DatasetSummary {
                dataset_id: d.id().to_string(),
                case_count: d.cases().len(),
                timestep_count: d.len_t(),
            })
            .collect(),
    )
}

#[derive(Debug, Deserialize)]
struct UploadParams {
    #[serde(default)]
    has_category_column: bool,
    #[serde(default)]
    name: Option<String>,
}

async fn upload_dataset(
    State(state): State<AppState>,
    Query(params): Query<UploadParams>,
    body: Bytes,
) -> Result<impl IntoResponse, ApiError> {
    let options = IngestOptions::default().with_categories(params.has_category_column);
    let (dataset, report) = parse_wide_csv(&body, &options)?;
    let dataset_id = state
        .registry
        .insert_named(dataset, params.name.as_deref())?;
    tracing::info!(%dataset_id, cases = report.case_count, "dataset uploaded");
    Ok((
        StatusCode::CREATED,
        Json(UploadResponse { dataset_id, report }),
    ))
}

async fn dataset_meta(
    State(state): State<AppState>,
    Path(id): Path<String>,
) -> Result<Json<DatasetMeta>, ApiError> {
    let d = lookup(&state, &id)?;
    Ok(Json(DatasetMeta {
        dataset_id: d.id().to_string(),
        time_labels: d.axis().labels().to_vec(),
        cases: d
            .cases()
            .iter()
            .map(|c| CaseMeta {
                id: c.id.clone(),
                name: c.name.clone(),
                category: c.category_name().to_string(),
            })
            .collect(),
        categories: d.categories().into_iter().map(str::to_string).collect(),
        case_count: d.cases().len(),
        timestep_count: d.len_t(),
        missing_cell_count: d.missing_cell_count(),
    }))
}

async fn dataset_series(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Query(params): Query<HashMap<String, String>>,
) -> Result<Json<SeriesResponse>, ApiError> {
    let d = lookup(&state, &id)?;
    let series = match params.get("cases") {
        None => d
            .cases()
            .iter()
            .map(|c| SeriesDto {
                id: c.id.clone(),
                values: c.values.clone(),
            })
            .collect(),
        Some(list) => list
            .split(',')
            .filter(|s| !s.is_empty())
            .map(|case_id| {
                d.case(case_id)
                    .map(|c| SeriesDto {
                        id: c.id.clone(),
                        values: c.values.clone(),
                    })
                    .map_err(|e| {
                        ApiError::new(StatusCode::BAD_REQUEST, "unknown-case", e.to_string())
                    })
            })
            .collect::<Result<_, _>>()?,
    };
    Ok(Json(SeriesResponse {
        dataset_id: d.id().to_string(),
        series,
    }))
}

async fn query_dataset(
    State(state): State<AppState>,
    Path(id): Path<String>,
    body: Bytes,
) -> Result<Json<crate::api::QueryResponse>, ApiError> {
    let d = lookup(&state, &id)?;
    let request: QueryRequest = serde_json::from_slice(&body).map_err(ApiError::from_json)?;
    run_query(&d, &request).map(Json)
}

/// Serves `app` on an already bound listener until `shutdown` resolves.
pub async fn serve<F>(
    listener: tokio::net::TcpListener,
    app: Router,
    shutdown: F,
) -> std::io::Result<()>
where
    F: std::future::Future<Output = ()> + Send + 'static,
{
    axum::serve(listener, app)
        .with_graceful_shutdown(shutdown)
        .await
}

/// Serves files under `dir` for every path the API does not claim.
pub fn with_static_dir(app: Router, dir: impl AsRef<std::path::Path>) -> Router {
    app.fallback_service(tower_http::services::ServeDir::new(dir))
}
