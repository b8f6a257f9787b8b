use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderValue, Method, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use tower_http::cors::{AllowOrigin, Any, CorsLayer};

use crate::api::{self, ApiError, PredictRequest, WhatIfRequest};
use crate::snapshot::Snapshot;

#[derive(Debug, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: String,
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status =
            StatusCode::from_u16(self.status()).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
        (
            status,
            Json(ErrorBody {
                error: self.to_string(),
            }),
        )
            .into_response()
    }
}

type Shared = State<Arc<Snapshot>>;

fn parse_body<T: DeserializeOwned>(body: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(body)
        .map_err(|e| ApiError::BadRequest(format!("malformed request body: {e}")))
}

#[derive(Debug, Deserialize)]
struct GroupQuery {
    group: Option<String>,
}

#[derive(Debug, Deserialize)]
struct DateQuery {
    date: Option<String>,
}

async fn health(State(s): Shared) -> impl IntoResponse {
    Json(api::health(&s))
}

async fn patterns(
    State(s): Shared,
    Query(q): Query<GroupQuery>,
) -> Result<impl IntoResponse, ApiError> {
    Ok(Json(api::patterns(&s, q.group.as_deref())?))
}

async fn predict(State(s): Shared, body: Bytes) -> Result<impl IntoResponse, ApiError> {
    let request: PredictRequest = parse_body(&body)?;
    Ok(Json(api::predict(&s, &request)?))
}

async fn whatif(State(s): Shared, body: Bytes) -> Result<impl IntoResponse, ApiError> {
    let request: WhatIfRequest = parse_body(&body)?;
    Ok(Json(api::whatif(&s, &request)?))
}

async fn feedback(
    State(s): Shared,
    Path(user_id): Path<String>,
    Query(q): Query<DateQuery>,
) -> Result<impl IntoResponse, ApiError> {
    let raw = q
        .date
        .ok_or_else(|| ApiError::BadRequest("missing date query parameter".into()))?;
    let date = api::parse_date(&raw)?;
    Ok(Json(api::feedback(&s, &user_id, date)?))
}

pub fn cors_layer(origins: &[String]) -> CorsLayer {
    let base = CorsLayer::new()
        .allow_methods([Method::GET, Method::POST])
        .allow_headers([header::CONTENT_TYPE]);
    if origins.iter().any(|o| o == "*") {
        return base.allow_origin(Any);
    }
    let list: Vec<HeaderValue> = origins
        .iter()
        .filter_map(|o| match HeaderValue::from_str(o) {
            Ok(v) => Some(v),
            Err(_) => {
                log::warn!("ignoring invalid CORS origin {o:?}");
                None
            }
        })
        .collect();
    base.allow_origin(AllowOrigin::list(list))
}

pub fn router(snapshot: Arc<Snapshot>, cors_origins: &[String]) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/patterns", get(patterns))
        .route("/predict", post(predict))
        .route("/whatif", post(whatif))
        .route("/feedback/{user_id}", get(feedback))
        .layer(cors_layer(cors_origins))
        .with_state(snapshot)
}
