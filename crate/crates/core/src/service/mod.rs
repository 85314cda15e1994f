//! HTTP API: `POST /summarize`, `GET /search`, `GET /health`.
//!
//! `/summarize` is stateless with respect to the corpus: it summarizes exactly
//! the articles in the request body. `/search` reads the current corpus
//! snapshot, which can be swapped atomically while requests are in flight.

mod config;

use std::collections::BTreeSet;
use std::path::Path;
use std::sync::{Arc, RwLock};

use axum::body::Bytes;
use axum::extract::{RawQuery, State};
use axum::http::{header, HeaderValue, Method, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use chrono::Datelike;
use serde::Serialize;
use serde_json::json;
use thiserror::Error;
use tower_http::cors::{Any, CorsLayer};
use tracing::{error, info};

use crate::corpus::{ingest, CorpusError, CorpusSnapshot, DocType, IngestReport};
use crate::llm::{Backend, LlmClient, LlmError};
use crate::pipeline::{PipelineError, SummaryPipeline};
use crate::ranking::{search, Ordering, SearchRequest};
use crate::summarizer::{PromptTemplates, SummarizeError, SummaryRequest, TemplateError};

pub use config::{ConfigError, ServiceConfig, DEFAULT_PORT};

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Templates(#[from] TemplateError),
    #[error(transparent)]
    Llm(#[from] LlmError),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error("server error: {0}")]
    Io(#[from] std::io::Error),
}

/// An error response: status plus a `{"error": {"code", "message"}}` body.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ApiError {
    pub status: StatusCode,
    pub code: &'static str,
    pub message: String,
}

impl ApiError {
    fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        Self {
            status,
            code,
            message: message.into(),
        }
    }

    fn invalid_params(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "invalid_params", message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = json!({"error": {"code": self.code, "message": self.message}});
        (self.status, Json(body)).into_response()
    }
}

impl From<SummarizeError> for ApiError {
    fn from(e: SummarizeError) -> Self {
        let code = match &e {
            SummarizeError::OutOfRange(0) => "empty_articles",
            SummarizeError::OutOfRange(_) => "too_many_articles",
            SummarizeError::DuplicateId(_) => "duplicate_ids",
            SummarizeError::EmptyTitle(_) => "empty_title",
            SummarizeError::BudgetTooSmall { .. } => "budget_exceeded",
        };
        Self::new(StatusCode::BAD_REQUEST, code, e.to_string())
    }
}

impl From<LlmError> for ApiError {
    fn from(e: LlmError) -> Self {
        let (status, code) = match &e {
            LlmError::Timeout { .. } => (StatusCode::GATEWAY_TIMEOUT, "upstream_timeout"),
            LlmError::AuthRejected { .. } => (StatusCode::BAD_GATEWAY, "upstream_auth_rejected"),
            LlmError::UpstreamFailed { .. } => (StatusCode::BAD_GATEWAY, "upstream_failed"),
            LlmError::BadRequestUpstream { .. } => {
                (StatusCode::BAD_GATEWAY, "upstream_bad_request")
            }
            LlmError::InvalidResponse(_) => (StatusCode::BAD_GATEWAY, "upstream_invalid_response"),
            LlmError::InvalidConfig(_) => (StatusCode::INTERNAL_SERVER_ERROR, "internal"),
        };
        Self::new(status, code, e.to_string())
    }
}

impl From<PipelineError> for ApiError {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::Request(e) => e.into(),
            PipelineError::Llm(e) => e.into(),
        }
    }
}

struct AppState {
    snapshot: RwLock<Option<Arc<CorpusSnapshot>>>,
    pipeline: SummaryPipeline,
    now_year: Option<i32>,
}

/// The service and its shared state. Cloning is cheap.
#[derive(Clone)]
pub struct Service {
    state: Arc<AppState>,
    allowed_origin: Option<String>,
}

impl Service {
    /// Builds the service without loading a corpus.
    pub fn new(config: &ServiceConfig) -> Result<Self, ServiceError> {
        config.validate()?;
        let templates = match &config.templates_path {
            Some(path) => PromptTemplates::load(path)?,
            None => PromptTemplates::default(),
        };
        let llm = LlmClient::new(config.llm.clone())?;
        let pipeline = SummaryPipeline {
            templates,
            budget_tokens: config.budget_tokens,
            thresholds: config.thresholds,
            llm,
        };
        Ok(Self::from_pipeline(
            pipeline,
            config.now_year,
            config.allowed_origin.clone(),
        ))
    }

    pub fn from_pipeline(
        pipeline: SummaryPipeline,
        now_year: Option<i32>,
        allowed_origin: Option<String>,
    ) -> Self {
        Self {
            state: Arc::new(AppState {
                snapshot: RwLock::new(None),
                pipeline,
                now_year,
            }),
            allowed_origin,
        }
    }

    /// Replaces the current snapshot; in-flight searches keep the old one.
    pub fn install_snapshot(&self, snapshot: CorpusSnapshot) {
        *self.state.snapshot.write().expect("snapshot lock poisoned") = Some(Arc::new(snapshot));
    }

    /// Ingests `path` and installs it. On failure the previous snapshot stays.
    pub fn load_corpus(&self, path: impl AsRef<Path>) -> Result<IngestReport, CorpusError> {
        let snapshot = ingest(path)?;
        let report = snapshot.report().clone();
        self.install_snapshot(snapshot);
        Ok(report)
    }

    pub fn snapshot(&self) -> Option<Arc<CorpusSnapshot>> {
        self.state
            .snapshot
            .read()
            .expect("snapshot lock poisoned")
            .clone()
    }

    pub fn router(&self) -> Router {
        let router = Router::new()
            .route("/summarize", post(summarize))
            .route("/search", get(search_handler))
            .route("/health", get(health))
            .with_state(self.state.clone());
        match &self.allowed_origin {
            None => router,
            Some(origin) => {
                let cors = CorsLayer::new()
                    .allow_methods([Method::GET, Method::POST])
                    .allow_headers([header::CONTENT_TYPE]);
                let cors = if origin == "*" {
                    cors.allow_origin(Any)
                } else {
                    match HeaderValue::from_str(origin) {
                        Ok(v) => cors.allow_origin(v),
                        Err(_) => {
                            error!(origin = %origin, "ignoring unparsable ALLOWED_ORIGIN");
                            return router;
                        }
                    }
                };
                router.layer(cors)
            }
        }
    }
}

async fn summarize(State(state): State<Arc<AppState>>, body: Bytes) -> Response {
    let request: SummaryRequest = match serde_json::from_slice(&body) {
        Ok(r) => r,
        Err(e) => {
            return ApiError::new(StatusCode::BAD_REQUEST, "malformed_body", e.to_string())
                .into_response()
        }
    };
    match state.pipeline.run(&request).await {
        Ok(response) => (StatusCode::OK, Json(response)).into_response(),
        Err(e) => {
            let api: ApiError = e.into();
            if api.status.is_server_error() {
                error!(code = api.code, message = %api.message, "summarize failed");
            }
            api.into_response()
        }
    }
}

#[derive(Debug, Serialize)]
struct SearchItem<'a> {
    rank: usize,
    id: &'a str,
    title: &'a str,
    year: i32,
    doc_type: DocType,
    topics: &'a BTreeSet<String>,
    score: f64,
    #[serde(rename = "abstract")]
    abstract_text: &'a str,
}

fn split_list(raw: &str) -> impl Iterator<Item = &str> {
    raw.split(',').map(str::trim).filter(|s| !s.is_empty())
}

/// Parses `/search` query parameters into a [`SearchRequest`].
pub fn parse_search_params(raw: Option<&str>) -> Result<SearchRequest, ApiError> {
    let mut req = SearchRequest::default();
    let mut doc_types: Option<BTreeSet<DocType>> = None;
    let mut topics: Option<BTreeSet<String>> = None;
    for (key, value) in url::form_urlencoded::parse(raw.unwrap_or("").as_bytes()) {
        let int = |v: &str| {
            v.trim()
                .parse::<i64>()
                .map_err(|_| ApiError::invalid_params(format!("{key}: {v:?} is not an integer")))
        };
        match key.as_ref() {
            "q" | "query" => req.query = value.into_owned(),
            "order" | "ordering" => {
                req.ordering = value
                    .parse::<Ordering>()
                    .map_err(|e| ApiError::invalid_params(e.to_string()))?
            }
            "year_from" => {
                req.year_from = Some(
                    i32::try_from(int(&value)?)
                        .map_err(|_| ApiError::invalid_params("year_from out of range"))?,
                )
            }
            "year_to" => {
                req.year_to = Some(
                    i32::try_from(int(&value)?)
                        .map_err(|_| ApiError::invalid_params("year_to out of range"))?,
                )
            }
            "limit" => {
                req.limit = usize::try_from(int(&value)?)
                    .map_err(|_| ApiError::invalid_params("limit must be positive"))?
            }
            "offset" => {
                req.offset = usize::try_from(int(&value)?)
                    .map_err(|_| ApiError::invalid_params("offset must be non-negative"))?
            }
            "doc_type" | "doc_types" => {
                let set = doc_types.get_or_insert_with(BTreeSet::new);
                for t in split_list(&value) {
                    set.insert(t.parse::<DocType>().map_err(ApiError::invalid_params)?);
                }
            }
            "topic" | "topics" => {
                topics
                    .get_or_insert_with(BTreeSet::new)
                    .extend(split_list(&value).map(str::to_string));
            }
            _ => {}
        }
    }
    req.doc_types = doc_types;
    req.topics = topics;
    req.validate()
        .map_err(|e| ApiError::invalid_params(e.to_string()))?;
    Ok(req)
}

async fn search_handler(State(state): State<Arc<AppState>>, RawQuery(raw): RawQuery) -> Response {
    let request = match parse_search_params(raw.as_deref()) {
        Ok(r) => r,
        Err(e) => return e.into_response(),
    };
    let Some(snapshot) = state
        .snapshot
        .read()
        .expect("snapshot lock poisoned")
        .clone()
    else {
        return ApiError::new(
            StatusCode::SERVICE_UNAVAILABLE,
            "corpus_not_loaded",
            "no corpus has been ingested yet",
        )
        .into_response();
    };
    let now_year = state.now_year.unwrap_or_else(|| chrono::Utc::now().year());
    let page = match search(&snapshot, &request, now_year) {
        Ok(p) => p,
        Err(e) => return ApiError::invalid_params(e.to_string()).into_response(),
    };

    let results: Vec<SearchItem<'_>> = page
        .results
        .iter()
        .filter_map(|r| snapshot.get(&r.article_id).ok().map(|a| (r, a)))
        .map(|(r, a)| SearchItem {
            rank: r.rank,
            id: &a.id,
            title: &a.title,
            year: a.year,
            doc_type: a.doc_type,
            topics: &a.topics,
            score: r.score,
            abstract_text: &a.abstract_text,
        })
        .collect();
    let body = json!({
        "total": page.total,
        "offset": request.offset,
        "limit": request.limit,
        "ordering": request.ordering,
        "results": results,
    });
    (StatusCode::OK, Json(body)).into_response()
}

async fn health(State(state): State<Arc<AppState>>) -> Response {
    let backend = state.pipeline.llm.backend().as_str();
    match state
        .snapshot
        .read()
        .expect("snapshot lock poisoned")
        .as_ref()
    {
        Some(s) => (
            StatusCode::OK,
            Json(json!({"status": "ok", "corpus_size": s.len(), "backend": backend})),
        )
            .into_response(),
        None => (
            StatusCode::SERVICE_UNAVAILABLE,
            Json(json!({"status": "unavailable", "corpus_size": 0, "backend": backend})),
        )
            .into_response(),
    }
}

/// Builds the service from `config`, ingests the configured corpus, and serves
/// until interrupted.
pub async fn serve(config: ServiceConfig) -> Result<(), ServiceError> {
    let service = Service::new(&config)?;
    if let Some(path) = &config.corpus_path {
        match service.load_corpus(path) {
            Ok(report) => info!(
                accepted = report.accepted,
                rejected = report.rejected_count(),
                "corpus loaded"
            ),
            Err(e) => error!(error = %e, "corpus ingest failed; /health reports 503"),
        }
    }
    let backend: Backend = config.llm.backend;
    let listener = tokio::net::TcpListener::bind(("0.0.0.0", config.port)).await?;
    info!(addr = %listener.local_addr()?, backend = backend.as_str(), "listening");
    axum::serve(listener, service.router())
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}
