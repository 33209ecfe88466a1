//! Read-only HTTP API over an [`Engine`]. Response bodies are the same
//! canonical serializations the CLI prints.

use std::path::PathBuf;
use std::sync::{Arc, RwLock};

use axum::body::Bytes;
use axum::extract::{Path, Request, State};
use axum::http::{header, HeaderName, HeaderValue, StatusCode};
use axum::middleware::{self, Next};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::canonical;
use crate::engine::{Engine, ENGINE_VERSION};
use crate::error::Error;
use crate::ingest::{normalize_domain, ArticleRecord, ARTICLE_FIELDS};

pub const HEADER_ENGINE_VERSION: &str = "x-engine-version";
pub const HEADER_CONFIG_HASH: &str = "x-config-hash";

/// Shared service state. Reload swaps the whole engine at once, so a
/// request sees one consistent snapshot, index and model.
pub struct AppState {
    engine: RwLock<Arc<Engine>>,
    config_path: Option<PathBuf>,
}

impl AppState {
    pub fn new(engine: Engine, config_path: Option<PathBuf>) -> Arc<Self> {
        Arc::new(AppState {
            engine: RwLock::new(Arc::new(engine)),
            config_path,
        })
    }

    pub fn engine(&self) -> Arc<Engine> {
        self.engine.read().unwrap_or_else(|p| p.into_inner()).clone()
    }

    fn swap(&self, engine: Engine) {
        *self.engine.write().unwrap_or_else(|p| p.into_inner()) = Arc::new(engine);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldError {
    pub field: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: String,
    pub message: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub fields: Vec<FieldError>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error_id: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Health {
    pub status: String,
    pub snapshot_id: u64,
    pub engine_version: String,
    pub config_hash: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClaimRequest {
    pub claim: String,
}

pub enum ApiError {
    BadRequest { message: String, fields: Vec<FieldError> },
    NotFound(String),
    Internal(String),
}

impl ApiError {
    fn bad(message: impl Into<String>) -> Self {
        ApiError::BadRequest {
            message: message.into(),
            fields: Vec::new(),
        }
    }

    fn field(field: &str, message: impl Into<String>) -> Self {
        let message = message.into();
        ApiError::BadRequest {
            message: format!("{field}: {message}"),
            fields: vec![FieldError {
                field: field.into(),
                message,
            }],
        }
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        match e {
            Error::MissingProfile(_) | Error::UnknownArticle(_) => ApiError::NotFound(e.to_string()),
            Error::EmptyClaim => ApiError::field("claim", e.to_string()),
            Error::MissingField { ref field, .. } => ApiError::field(&field.clone(), e.to_string()),
            Error::MalformedLine { .. }
            | Error::Validation(_)
            | Error::NoHost(_)
            | Error::EmptyBody(_)
            | Error::InsufficientEvidence(_)
            | Error::Json(_) => ApiError::bad(e.to_string()),
            other => ApiError::Internal(other.to_string()),
        }
    }
}

fn canonical_response(status: StatusCode, body: &impl Serialize) -> Response {
    match canonical::to_string(body) {
        Ok(text) => (status, [(header::CONTENT_TYPE, "application/json")], text).into_response(),
        Err(e) => internal(e.to_string()),
    }
}

fn internal(detail: String) -> Response {
    let id = uuid::Uuid::new_v4().to_string();
    log::error!("request {id} failed: {detail}");
    let body = ErrorBody {
        error: "internal".into(),
        message: "internal error".into(),
        fields: Vec::new(),
        error_id: Some(id),
    };
    let text = canonical::to_string(&body).unwrap_or_default();
    (
        StatusCode::INTERNAL_SERVER_ERROR,
        [(header::CONTENT_TYPE, "application/json")],
        text,
    )
        .into_response()
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        match self {
            ApiError::BadRequest { message, fields } => canonical_response(
                StatusCode::BAD_REQUEST,
                &ErrorBody {
                    error: "bad_request".into(),
                    message,
                    fields,
                    error_id: None,
                },
            ),
            ApiError::NotFound(message) => canonical_response(
                StatusCode::NOT_FOUND,
                &ErrorBody {
                    error: "not_found".into(),
                    message,
                    fields: Vec::new(),
                    error_id: None,
                },
            ),
            ApiError::Internal(detail) => internal(detail),
        }
    }
}

type ApiResult = Result<Response, ApiError>;

fn parse_object(body: &Bytes) -> Result<serde_json::Map<String, Value>, ApiError> {
    match serde_json::from_slice::<Value>(body) {
        Ok(Value::Object(map)) => Ok(map),
        Ok(_) => Err(ApiError::bad("request body must be a JSON object")),
        Err(e) => Err(ApiError::bad(format!("request body is not valid JSON: {e}"))),
    }
}

/// Checks presence and type of every article field, collecting one message
/// per offending field.
pub fn article_from_json(map: serde_json::Map<String, Value>) -> Result<ArticleRecord, ApiError> {
    let mut fields = Vec::new();
    for name in ARTICLE_FIELDS {
        let problem = match (name, map.get(name)) {
            (_, None) => Some("is required"),
            ("published_at", Some(v)) if !v.is_i64() => Some("must be an integer timestamp"),
            ("published_at", Some(_)) => None,
            (_, Some(v)) if !v.is_string() => Some("must be a string"),
            _ => None,
        };
        if let Some(message) = problem {
            fields.push(FieldError {
                field: name.into(),
                message: message.into(),
            });
        }
    }
    for key in map.keys().filter(|k| !ARTICLE_FIELDS.contains(&k.as_str())) {
        fields.push(FieldError {
            field: key.clone(),
            message: "is not a known article field".into(),
        });
    }
    if !fields.is_empty() {
        let message = fields
            .iter()
            .map(|f| format!("{} {}", f.field, f.message))
            .collect::<Vec<_>>()
            .join("; ");
        return Err(ApiError::BadRequest { message, fields });
    }
    let article: ArticleRecord =
        serde_json::from_value(Value::Object(map)).map_err(|e| ApiError::bad(e.to_string()))?;
    article.validate()?;
    Ok(article)
}

async fn health(State(state): State<Arc<AppState>>) -> ApiResult {
    let engine = state.engine();
    Ok(canonical_response(
        StatusCode::OK,
        &Health {
            status: "ok".into(),
            snapshot_id: engine.snapshot().snapshot_id,
            engine_version: ENGINE_VERSION.into(),
            config_hash: engine.config_hash.clone(),
        },
    ))
}

async fn profile(State(state): State<Arc<AppState>>, Path(domain): Path<String>) -> ApiResult {
    let domain = normalize_domain(&domain)?;
    let engine = state.engine();
    let profile = engine
        .profile(&domain)
        .ok_or(Error::MissingProfile(domain))?;
    Ok(canonical_response(StatusCode::OK, &profile))
}

async fn score_article(State(state): State<Arc<AppState>>, body: Bytes) -> ApiResult {
    let article = article_from_json(parse_object(&body)?)?;
    let score = state.engine().score_article(&article)?;
    Ok(canonical_response(StatusCode::OK, &score))
}

async fn score_claim(State(state): State<Arc<AppState>>, body: Bytes) -> ApiResult {
    let map = parse_object(&body)?;
    let request: ClaimRequest = match map.get("claim") {
        None => return Err(ApiError::field("claim", "is required")),
        Some(v) if !v.is_string() => return Err(ApiError::field("claim", "must be a string")),
        Some(_) => serde_json::from_value(Value::Object(map)).map_err(|e| ApiError::bad(e.to_string()))?,
    };
    let engine = state.engine();
    let verdict = tokio::task::spawn_blocking(move || engine.score_claim(&request.claim))
        .await
        .map_err(|e| ApiError::Internal(e.to_string()))??;
    Ok(canonical_response(StatusCode::OK, &verdict))
}

async fn reload(State(state): State<Arc<AppState>>) -> ApiResult {
    let engine = match &state.config_path {
        Some(path) => Engine::load(path)?,
        None => {
            let current = state.engine();
            let resolved = crate::config::ResolvedConfig {
                config: current.config.clone(),
                base_dir: current.base_dir.clone(),
            };
            Engine::from_resolved(resolved)?
        }
    };
    state.swap(engine);
    health(State(state)).await
}

async fn not_found() -> ApiError {
    ApiError::NotFound("no such endpoint".into())
}

async fn stamp_headers(State(state): State<Arc<AppState>>, request: Request, next: Next) -> Response {
    let hash = state.engine().config_hash.clone();
    let mut response = next.run(request).await;
    let headers = response.headers_mut();
    headers.insert(
        HeaderName::from_static(HEADER_ENGINE_VERSION),
        HeaderValue::from_static(ENGINE_VERSION),
    );
    if let Ok(v) = HeaderValue::from_str(&hash) {
        headers.insert(HeaderName::from_static(HEADER_CONFIG_HASH), v);
    }
    response
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/v1/health", get(health))
        .route("/v1/profile/{domain}", get(profile))
        .route("/v1/score/article", post(score_article))
        .route("/v1/score/claim", post(score_claim))
        .route("/v1/reload", post(reload))
        .fallback(not_found)
        .layer(middleware::from_fn_with_state(state.clone(), stamp_headers))
        .with_state(state)
}

/// Serves until ctrl-c.
pub async fn serve(state: Arc<AppState>, bind: &str) -> crate::error::Result<()> {
    let listener = tokio::net::TcpListener::bind(bind)
        .await
        .map_err(|e| Error::io(bind, e))?;
    log::info!("listening on {bind}");
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
        .map_err(|e| Error::io(bind, e))
}
