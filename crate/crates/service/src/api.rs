use std::collections::HashMap;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use mcaw_core::dataset::{frequency_table, proportion_table, rate_by_group};
use mcaw_core::inference::{
    describe_dimension, group_ellipse, EllipseKind, DEFAULT_LEVEL, DEFAULT_P_THRESHOLD,
};
use mcaw_core::mca::{
    contributions as ctr_table, coordinates as coord_table, cos2 as cos2_table, eigenvalue_table,
    project_supplementary, variable_eta2, McaModel, Target,
};
use mcaw_core::pipeline::{parse_axes, AnalysisOptions};
use mcaw_core::report::{dataset_summary, model_report, to_json, IngestReport};
use mcaw_core::schema::{parse_csv_reader, validate, DataDictionary};
use serde::{Deserialize, Serialize};

use crate::error::ApiError;
use crate::store::{DatasetEntry, ModelEntry, Store};

type AppState = State<Arc<Store>>;
type Params = Query<HashMap<String, String>>;
type ApiResult = Result<Response, ApiError>;

const IMMUTABLE: &str = "public, max-age=31536000, immutable";

fn json(status: StatusCode, body: String) -> Response {
    (status, [(header::CONTENT_TYPE, "application/json")], body).into_response()
}

/// Model-derived bodies never change for a given id.
fn cached(body: String) -> Response {
    (
        [
            (header::CONTENT_TYPE, "application/json"),
            (header::CACHE_CONTROL, IMMUTABLE),
        ],
        body,
    )
        .into_response()
}

fn dataset_entry(store: &Store, id: &str) -> Result<Arc<DatasetEntry>, ApiError> {
    store.dataset(id).ok_or_else(|| ApiError::not_found("dataset", id))
}

fn model_entry(store: &Store, id: &str) -> Result<Arc<ModelEntry>, ApiError> {
    store.model(id).ok_or_else(|| ApiError::not_found("model", id))
}

fn param<'a>(q: &'a HashMap<String, String>, key: &str) -> Option<&'a str> {
    q.get(key).map(String::as_str).filter(|s| !s.is_empty())
}

fn required<'a>(q: &'a HashMap<String, String>, key: &str) -> Result<&'a str, ApiError> {
    param(q, key).ok_or_else(|| ApiError::bad_request(format!("missing query parameter {key:?}")))
}

fn parsed<T: std::str::FromStr>(
    q: &HashMap<String, String>,
    key: &str,
    default: T,
) -> Result<T, ApiError> {
    match param(q, key) {
        None => Ok(default),
        Some(s) => s
            .parse()
            .map_err(|_| ApiError::bad_request(format!("bad value {s:?} for {key:?}"))),
    }
}

fn target(q: &HashMap<String, String>) -> Result<Target, ApiError> {
    Ok(match param(q, "target") {
        None => Target::Categories,
        Some(s) => s.parse()?,
    })
}

fn dims(q: &HashMap<String, String>, model: &McaModel) -> Result<Vec<usize>, ApiError> {
    Ok(match param(q, "dims") {
        None => (1..=model.n_dims()).collect(),
        Some(s) => parse_axes(s)?,
    })
}

pub async fn healthz() -> Response {
    json(StatusCode::OK, "{\"status\":\"ok\"}".into())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct UploadRequest {
    csv: String,
    /// Dictionary document (TOML).
    dictionary: String,
    #[serde(default)]
    options: AnalysisOptions,
}

#[derive(Serialize)]
struct UploadResponse<'a> {
    dataset_id: &'a str,
    #[serde(flatten)]
    report: &'a IngestReport,
}

pub async fn upload_dataset(State(store): AppState, body: Bytes) -> ApiResult {
    let req: UploadRequest = serde_json::from_slice(&body)
        .map_err(|e| ApiError::bad_request(format!("invalid upload body: {e}")))?;
    let dict = DataDictionary::from_toml_str(&req.dictionary)?;
    let raw = parse_csv_reader(req.csv.as_bytes(), &dict)?;
    let validation = validate(&raw);
    if !validation.is_empty() {
        return Err(ApiError {
            status: StatusCode::BAD_REQUEST,
            message: format!("{} validation issue(s)", validation.issues.len()),
            validation: Some(validation),
        });
    }
    let dataset = req.options.build_dataset(&raw)?;
    let report = IngestReport {
        rows: raw.n_rows(),
        validation,
        summary: dataset_summary(&dataset),
    };
    let entry = DatasetEntry {
        summary_json: to_json(&report.summary),
        raw,
        options: req.options,
        dataset,
    };
    let id = store.insert_dataset(entry);
    tracing::info!(%id, rows = report.rows, "dataset stored");
    Ok(json(
        StatusCode::OK,
        to_json(&UploadResponse {
            dataset_id: &id,
            report: &report,
        }),
    ))
}

pub async fn get_dataset(State(store): AppState, Path(id): Path<String>) -> ApiResult {
    Ok(cached(dataset_entry(&store, &id)?.summary_json.clone()))
}

#[derive(Serialize)]
struct FitResponse<'a> {
    model_id: &'a str,
    dataset_id: &'a str,
    eigen_table: mcaw_core::mca::EigenTable,
}

/// An empty body reuses the options given at upload.
pub async fn fit_model(State(store): AppState, Path(id): Path<String>, body: Bytes) -> ApiResult {
    let entry = dataset_entry(&store, &id)?;
    let options: AnalysisOptions = if body.iter().all(u8::is_ascii_whitespace) {
        entry.options.clone()
    } else {
        serde_json::from_slice(&body)
            .map_err(|e| ApiError::bad_request(format!("invalid analysis options: {e}")))?
    };
    let dataset = options.build_dataset(&entry.raw)?;
    let model = options.fit(&dataset)?;
    let eigen_table = eigenvalue_table(&model);
    let report_json = to_json(&model_report(&model));
    let model_id = store.insert_model(ModelEntry {
        dataset_id: id.clone(),
        options,
        dataset,
        model,
        report_json,
    });
    tracing::info!(%model_id, dataset_id = %id, "model fitted");
    Ok(json(
        StatusCode::OK,
        to_json(&FitResponse {
            model_id: &model_id,
            dataset_id: &id,
            eigen_table,
        }),
    ))
}

pub async fn frequencies(State(store): AppState, Path(id): Path<String>, Query(q): Params) -> ApiResult {
    let e = dataset_entry(&store, &id)?;
    Ok(cached(to_json(&frequency_table(&e.dataset, required(&q, "var")?)?)))
}

pub async fn rates(State(store): AppState, Path(id): Path<String>, Query(q): Params) -> ApiResult {
    let e = dataset_entry(&store, &id)?;
    let decimals = parsed(&q, "decimals", 2u32)?;
    Ok(cached(to_json(&rate_by_group(&e.dataset, required(&q, "var")?, decimals)?)))
}

pub async fn proportions(State(store): AppState, Path(id): Path<String>, Query(q): Params) -> ApiResult {
    let e = dataset_entry(&store, &id)?;
    let level = parsed(&q, "level", DEFAULT_LEVEL)?;
    Ok(cached(to_json(&proportion_table(&e.dataset, required(&q, "var")?, level)?)))
}

pub async fn get_model(State(store): AppState, Path(id): Path<String>) -> ApiResult {
    Ok(cached(model_entry(&store, &id)?.report_json.clone()))
}

pub async fn eigenvalues(State(store): AppState, Path(id): Path<String>) -> ApiResult {
    Ok(cached(to_json(&eigenvalue_table(&model_entry(&store, &id)?.model))))
}

pub async fn coordinates(State(store): AppState, Path(id): Path<String>, Query(q): Params) -> ApiResult {
    let m = &model_entry(&store, &id)?.model;
    Ok(cached(to_json(&coord_table(m, target(&q)?, &dims(&q, m)?)?)))
}

pub async fn cos2(State(store): AppState, Path(id): Path<String>, Query(q): Params) -> ApiResult {
    let m = &model_entry(&store, &id)?.model;
    Ok(cached(to_json(&cos2_table(m, target(&q)?, &dims(&q, m)?)?)))
}

pub async fn contributions(State(store): AppState, Path(id): Path<String>, Query(q): Params) -> ApiResult {
    let m = &model_entry(&store, &id)?.model;
    Ok(cached(to_json(&ctr_table(m, target(&q)?))))
}

pub async fn eta2(State(store): AppState, Path(id): Path<String>) -> ApiResult {
    Ok(cached(to_json(&variable_eta2(&model_entry(&store, &id)?.model))))
}

pub async fn dimdesc(State(store): AppState, Path(id): Path<String>, Query(q): Params) -> ApiResult {
    let e = model_entry(&store, &id)?;
    let axis = parsed(&q, "axis", 1usize)?;
    let threshold = parsed(&q, "threshold", DEFAULT_P_THRESHOLD)?;
    Ok(cached(to_json(&describe_dimension(&e.model, &e.dataset, axis, threshold)?)))
}

pub async fn ellipses(State(store): AppState, Path(id): Path<String>, Query(q): Params) -> ApiResult {
    let e = model_entry(&store, &id)?;
    let group = required(&q, "group")?;
    let level = parsed(&q, "level", DEFAULT_LEVEL)?;
    let kind = parsed(&q, "kind", EllipseKind::Mean)?;
    let axes = match param(&q, "axes") {
        None => vec![1, 2],
        Some(s) => parse_axes(s)?,
    };
    let axes: [usize; 2] = axes
        .try_into()
        .map_err(|_| ApiError::bad_request("axes must name exactly two axes"))?;
    Ok(cached(to_json(&group_ellipse(&e.model, &e.dataset, group, axes, level, kind)?)))
}

pub async fn model_rates(State(store): AppState, Path(id): Path<String>, Query(q): Params) -> ApiResult {
    let e = model_entry(&store, &id)?;
    let decimals = parsed(&q, "decimals", 2u32)?;
    Ok(cached(to_json(&rate_by_group(&e.dataset, required(&q, "var")?, decimals)?)))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SupplementaryRequest {
    membership: Vec<u8>,
}

#[derive(Serialize)]
struct SupplementaryResponse {
    dims: Vec<usize>,
    coordinates: Vec<f64>,
}

pub async fn supplementary(State(store): AppState, Path(id): Path<String>, body: Bytes) -> ApiResult {
    let e = model_entry(&store, &id)?;
    let req: SupplementaryRequest = serde_json::from_slice(&body)
        .map_err(|err| ApiError::bad_request(format!("invalid membership body: {err}")))?;
    if let Some(v) = req.membership.iter().find(|&&v| v > 1) {
        return Err(ApiError::bad_request(format!("membership entries must be 0 or 1, got {v}")));
    }
    let member: Vec<bool> = req.membership.iter().map(|&v| v == 1).collect();
    let coordinates = project_supplementary(&e.model, &member)?;
    Ok(cached(to_json(&SupplementaryResponse {
        dims: (1..=coordinates.len()).collect(),
        coordinates,
    })))
}
