use std::collections::HashMap;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::ServiceError;
use crate::service::{CreateSession, RatingRequest, Service};

#[derive(Serialize)]
struct ErrorBody<'a> {
    code: &'a str,
    message: String,
}

pub struct ApiError(ServiceError);

impl From<ServiceError> for ApiError {
    fn from(e: ServiceError) -> Self {
        Self(e)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = StatusCode::from_u16(self.0.http_status()).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
        let body = ErrorBody {
            code: self.0.code(),
            message: self.0.to_string(),
        };
        (status, Json(body)).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

fn json_body<T: DeserializeOwned>(body: &Bytes) -> Result<T, ServiceError> {
    serde_json::from_slice(body).map_err(|e| ServiceError::BadRequest(e.to_string()))
}

fn trial_index(raw: &str) -> Result<usize, ServiceError> {
    raw.parse()
        .map_err(|_| ServiceError::BadRequest(format!("trial index {raw:?} is not a number")))
}

/// Routes:
///
/// - `POST /session` `{rater_id, affiliation}` → `{sid, n_trials, cursor, complete}`
/// - `GET /session/{sid}` → same shape, for resuming
/// - `GET /session/{sid}/trial/{i}` → trial payload
/// - `GET /session/{sid}/trial/{i}/audio` → `audio/wav`
/// - `POST /session/{sid}/trial/{i}/rating` `{scores, played}` → acknowledgement
/// - `GET /export/ratings.csv[?include_partial=true]` with `Authorization: Bearer <token>`
pub fn router(service: Arc<Service>) -> Router {
    Router::new()
        .route("/session", post(create_session))
        .route("/session/{sid}", get(session_info))
        .route("/session/{sid}/trial/{i}", get(trial))
        .route("/session/{sid}/trial/{i}/audio", get(trial_audio))
        .route("/session/{sid}/trial/{i}/rating", post(submit))
        .route("/export/ratings.csv", get(export))
        .fallback(not_found)
        .with_state(service)
}

async fn not_found() -> ApiError {
    ApiError(ServiceError::NoRoute)
}

async fn create_session(State(svc): State<Arc<Service>>, body: Bytes) -> ApiResult<impl IntoResponse> {
    let req: CreateSession = json_body(&body)?;
    Ok((StatusCode::CREATED, Json(svc.create_session(&req)?)))
}

async fn session_info(State(svc): State<Arc<Service>>, Path(sid): Path<String>) -> ApiResult<impl IntoResponse> {
    Ok(Json(svc.session_info(&sid)?))
}

async fn trial(State(svc): State<Arc<Service>>, Path((sid, i)): Path<(String, String)>) -> ApiResult<impl IntoResponse> {
    Ok(Json(svc.trial(&sid, trial_index(&i)?)?))
}

async fn trial_audio(
    State(svc): State<Arc<Service>>,
    Path((sid, i)): Path<(String, String)>,
) -> ApiResult<impl IntoResponse> {
    let bytes = svc.trial_audio(&sid, trial_index(&i)?)?;
    Ok(([(header::CONTENT_TYPE, "audio/wav"), (header::CACHE_CONTROL, "no-store")], bytes))
}

async fn submit(
    State(svc): State<Arc<Service>>,
    Path((sid, i)): Path<(String, String)>,
    body: Bytes,
) -> ApiResult<impl IntoResponse> {
    let index = trial_index(&i)?;
    let req: RatingRequest = json_body(&body)?;
    Ok(Json(svc.submit(&sid, index, &req)?))
}

async fn export(
    State(svc): State<Arc<Service>>,
    headers: HeaderMap,
    Query(q): Query<HashMap<String, String>>,
) -> ApiResult<impl IntoResponse> {
    let auth = headers.get(header::AUTHORIZATION).and_then(|v| v.to_str().ok());
    svc.authorize_export(auth)?;
    let include_partial = q.get("include_partial").is_some_and(|v| v == "true" || v == "1");
    let csv = svc.export_csv(include_partial)?;
    Ok(([(header::CONTENT_TYPE, "text/csv; charset=utf-8")], csv))
}
