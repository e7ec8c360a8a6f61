//! HTTP routes over [`Engine`].

use std::collections::HashMap;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::Error;
use crate::prefix::PrefixError;
use crate::service::Engine;

#[derive(Debug, Serialize)]
pub struct ErrorBody {
    pub code: &'static str,
    pub message: String,
}

pub struct ApiError(pub Error);

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        ApiError(e)
    }
}

fn status_of(e: &Error) -> StatusCode {
    match e {
        Error::UnknownLanguage(_)
        | Error::UnknownDictionary(_)
        | Error::UnknownTarget { .. }
        | Error::Prefix(PrefixError::UnknownPrefix(_)) => StatusCode::NOT_FOUND,
        Error::DuplicateId { .. } | Error::IllegalTransition { .. } | Error::MissingArtifact { .. } => {
            StatusCode::CONFLICT
        }
        Error::Io { .. } | Error::Format { .. } => StatusCode::INTERNAL_SERVER_ERROR,
        _ => StatusCode::UNPROCESSABLE_ENTITY,
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = match &self.0 {
            Error::InvalidPayload(_) => StatusCode::BAD_REQUEST,
            e => status_of(e),
        };
        let body = ErrorBody {
            code: self.0.code(),
            message: self.0.to_string(),
        };
        (status, Json(body)).into_response()
    }
}

type ApiResult<T> = Result<Json<T>, ApiError>;

fn parse_body<T: DeserializeOwned>(body: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| ApiError(Error::InvalidPayload(e.to_string())))
}

pub fn router(engine: Arc<Engine>) -> Router {
    Router::new()
        .route("/api/languages", get(languages))
        .route("/api/languages/{code}/prefix", get(prefix_root))
        .route("/api/languages/{code}/prefix/{prefix}", get(prefix))
        .route("/api/search", get(search))
        .route("/api/feedback", post(feedback))
        .route("/api/markers", post(markers))
        .route("/api/annotations", post(annotations))
        .route("/api/digitizations", post(digitizations))
        .with_state(engine)
}

async fn languages(State(engine): State<Arc<Engine>>) -> impl IntoResponse {
    Json(engine.languages())
}

fn expansion(engine: &Engine, code: &str, prefix: &str) -> Result<Response, ApiError> {
    let body = engine.list_prefix(code, prefix)?;
    let mut response = Json(body).into_response();
    response
        .headers_mut()
        .insert(header::CACHE_CONTROL, HeaderValue::from_static("public, max-age=3600"));
    Ok(response)
}

async fn prefix_root(State(engine): State<Arc<Engine>>, Path(code): Path<String>) -> Result<Response, ApiError> {
    expansion(&engine, &code, "")
}

async fn prefix(
    State(engine): State<Arc<Engine>>,
    Path((code, prefix)): Path<(String, String)>,
) -> Result<Response, ApiError> {
    expansion(&engine, &code, &prefix)
}

async fn search(
    State(engine): State<Arc<Engine>>,
    Query(params): Query<HashMap<String, String>>,
) -> ApiResult<crate::service::SearchResponse> {
    let (Some(lang), Some(q)) = (params.get("lang"), params.get("q")) else {
        return Err(Error::InvalidPayload("lang and q are required".into()).into());
    };
    Ok(Json(engine.search(q, lang).await?))
}

async fn feedback(State(engine): State<Arc<Engine>>, body: Bytes) -> ApiResult<crate::store::FeedbackAck> {
    Ok(Json(engine.submit_feedback(parse_body(&body)?)?))
}

async fn markers(State(engine): State<Arc<Engine>>, body: Bytes) -> ApiResult<crate::service::MarkerAck> {
    Ok(Json(engine.submit_marker(parse_body(&body)?)?))
}

async fn annotations(State(engine): State<Arc<Engine>>, body: Bytes) -> ApiResult<crate::service::AnnotationAck> {
    Ok(Json(engine.submit_annotation(parse_body(&body)?)?))
}

async fn digitizations(State(engine): State<Arc<Engine>>, body: Bytes) -> ApiResult<crate::service::DigitizationAck> {
    Ok(Json(engine.submit_digitization(parse_body(&body)?)?))
}

/// Binds and serves until ctrl-c.
pub async fn serve(engine: Arc<Engine>, bind: &str, port: u16) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind((bind, port)).await?;
    tracing::info!(addr = %listener.local_addr()?, "listening");
    axum::serve(listener, router(engine))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
