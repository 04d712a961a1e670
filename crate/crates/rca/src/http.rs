//! HTTP surface: suggestion generation, similarity lookup, batch metric
//! evaluation, and index rebuilds.
//!
//! Handlers are stateless over an immutable snapshot of the loaded corpus
//! and index (`Arc` swaps on rebuild), so concurrent requests are safe. The
//! blocking pipeline runs inside `spawn_blocking`.
//!
//! | Route                          | Purpose                              |
//! |--------------------------------|--------------------------------------|
//! | POST /v1/rca                   | suggest a root cause for an incident |
//! | GET  /v1/incidents/:id/similar | nearest historical incidents         |
//! | POST /v1/evaluate              | score candidate/reference pairs      |
//! | POST /v1/index/build           | rebuild and swap the index           |

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::{Arc, RwLock};

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use chrono::{TimeZone, Utc};

use rca_core::embed::Embedder;
use rca_core::generate::GenerateError;
use rca_core::incident::{Incident, Status};
use rca_core::index::{IndexKind, SearchHit};
use rca_core::metrics::evaluate_corpus;
use rca_core::prompt::{OrderingMode, PromptError, TokenBudget, TokenCounter};
use rca_core::provider::CompletionProvider;
use rca_core::retrieve::SelectionMode;
use rca_core::summarize::SummarizeError;

use crate::config::AppConfig;
use crate::io::{load_incidents, load_index, save_index, FileSummaryCache};
use crate::pipeline::{run_rca, PipelineError, RcaParams};
use crate::providers::embedder_from_config;

/// Snapshot the handlers read; rebuilds swap the whole thing atomically.
struct Loaded {
    corpus: Arc<BTreeMap<String, Incident>>,
    index: Option<Arc<IndexKind>>,
}

#[derive(Clone)]
pub struct AppState {
    loaded: Arc<RwLock<Loaded>>,
    config: Arc<AppConfig>,
    summarizer: Arc<dyn CompletionProvider>,
    generator: Arc<dyn CompletionProvider>,
    embedder: Arc<dyn Embedder>,
    cache: Arc<FileSummaryCache>,
}

#[derive(Debug, thiserror::Error)]
pub enum ServiceError {
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] crate::io::IoError),
    #[error(transparent)]
    Embed(#[from] rca_core::embed::EmbedError),
}

impl AppState {
    /// Build service state from configuration, loading the corpus and index
    /// files when they exist (the index can also arrive later through
    /// `POST /v1/index/build`).
    pub fn from_config(config: AppConfig) -> Result<AppState, ServiceError> {
        let embedder = embedder_from_config(&config.embedder)?;
        let summarizer = config.summarizer.build();
        let generator = config.generator.build();
        if let Some(parent) = config.cache_path.parent() {
            if !parent.as_os_str().is_empty() {
                std::fs::create_dir_all(parent)
                    .map_err(|e| ServiceError::Config(format!("cache dir: {e}")))?;
            }
        }
        let cache = FileSummaryCache::open(&config.cache_path)?;
        let corpus = if config.corpus_path.exists() {
            let (incidents, _) = load_incidents(&config.corpus_path)?;
            incidents
                .into_iter()
                .map(|incident| (incident.id.clone(), incident))
                .collect()
        } else {
            BTreeMap::new()
        };
        let index = if config.index_path.exists() {
            Some(Arc::new(load_index(&config.index_path)?))
        } else {
            None
        };
        Ok(AppState {
            loaded: Arc::new(RwLock::new(Loaded {
                corpus: Arc::new(corpus),
                index,
            })),
            config: Arc::new(config),
            summarizer: Arc::from(summarizer),
            generator: Arc::from(generator),
            embedder: Arc::from(embedder),
            cache: Arc::new(cache),
        })
    }

    fn snapshot(&self) -> (Arc<BTreeMap<String, Incident>>, Option<Arc<IndexKind>>) {
        let loaded = self.loaded.read().expect("state lock");
        (loaded.corpus.clone(), loaded.index.clone())
    }

    fn budget(&self) -> Result<TokenBudget, PromptError> {
        let counter = TokenCounter::from_id(&self.config.budget.counter_id)?;
        TokenBudget::new(
            self.config.budget.prompt_limit,
            self.config.budget.completion_reserve,
            counter,
        )
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/v1/rca", post(handle_rca))
        .route("/v1/incidents/:id/similar", get(handle_similar))
        .route("/v1/evaluate", post(handle_evaluate))
        .route("/v1/index/build", post(handle_index_build))
        .with_state(state)
}

/// Run the service until the process is stopped.
pub async fn serve(state: AppState, addr: &str) -> Result<(), std::io::Error> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    tracing::info!(%addr, "listening");
    axum::serve(listener, router(state)).await
}

struct ApiError {
    status: StatusCode,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        ApiError {
            status,
            message: message.into(),
        }
    }

    fn unprocessable(message: impl Into<String>) -> Self {
        Self::new(StatusCode::UNPROCESSABLE_ENTITY, message)
    }

    fn index_absent() -> Self {
        Self::new(StatusCode::CONFLICT, "no index loaded; build one first")
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (
            self.status,
            Json(serde_json::json!({ "error": self.message })),
        )
            .into_response()
    }
}

impl From<JsonRejection> for ApiError {
    fn from(rejection: JsonRejection) -> Self {
        ApiError::unprocessable(rejection.body_text())
    }
}

impl From<PipelineError> for ApiError {
    fn from(error: PipelineError) -> Self {
        match &error {
            PipelineError::Summarize(SummarizeError::Provider(_))
            | PipelineError::Generate(GenerateError::Provider(_)) => {
                ApiError::new(StatusCode::SERVICE_UNAVAILABLE, error.to_string())
            }
            _ => ApiError::unprocessable(error.to_string()),
        }
    }
}

#[derive(Debug, serde::Deserialize)]
struct IncidentPayload {
    #[serde(default)]
    id: Option<String>,
    title: String,
    summary: String,
    #[serde(default)]
    root_cause: Option<String>,
    #[serde(default)]
    severity: Option<u8>,
}

impl IncidentPayload {
    fn into_incident(self) -> Result<Incident, ApiError> {
        if self.title.trim().is_empty() {
            return Err(ApiError::unprocessable("title must be non-empty"));
        }
        if self.summary.trim().is_empty() {
            return Err(ApiError::unprocessable("summary must be non-empty"));
        }
        Ok(Incident {
            id: self.id.unwrap_or_else(|| "new-incident".to_string()),
            title: self.title,
            summary_raw: self.summary,
            root_cause_raw: self.root_cause.unwrap_or_default(),
            summary_clean: None,
            root_cause_clean: None,
            summary_short: None,
            root_cause_short: None,
            severity: self.severity.unwrap_or(2),
            status: Status::Other,
            created_at: Utc.timestamp_opt(0, 0).unwrap(),
            owning_service: None,
        })
    }
}

#[derive(Debug, serde::Deserialize)]
struct RcaRequest {
    incident: IncidentPayload,
    #[serde(default)]
    k: Option<usize>,
    #[serde(default)]
    mode: Option<SelectionMode>,
    #[serde(default)]
    ordering: Option<OrderingMode>,
}

#[derive(Debug, serde::Serialize)]
struct RcaResponse {
    suggestion: String,
    provider_id: String,
    examples_used: Vec<String>,
    relevances: Vec<f64>,
    prompt_token_count: usize,
    truncated: bool,
}

async fn handle_rca(
    State(state): State<AppState>,
    payload: Result<Json<RcaRequest>, JsonRejection>,
) -> Result<Json<RcaResponse>, ApiError> {
    let Json(request) = payload?;
    let incident = request.incident.into_incident()?;
    let (corpus, index) = state.snapshot();
    let Some(index) = index else {
        return Err(ApiError::index_absent());
    };
    let params = RcaParams {
        k: request.k.unwrap_or(state.config.default_k),
        mode: request.mode.unwrap_or(SelectionMode::Relevant),
        ordering: request
            .ordering
            .unwrap_or(OrderingMode::DescendingRelevance),
        seed: state.config.seed,
    };
    let budget = state
        .budget()
        .map_err(|e| ApiError::unprocessable(e.to_string()))?;
    let worker_state = state.clone();
    let outcome = tokio::task::spawn_blocking(move || {
        run_rca(
            &incident,
            &corpus,
            &index,
            worker_state.embedder.as_ref(),
            worker_state.summarizer.as_ref(),
            worker_state.generator.as_ref(),
            worker_state.cache.as_ref(),
            &budget,
            &params,
        )
    })
    .await
    .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))??;
    Ok(Json(RcaResponse {
        suggestion: outcome.suggestion.text,
        provider_id: outcome.suggestion.provider_id,
        relevances: outcome.examples.iter().map(|e| e.relevance).collect(),
        examples_used: outcome.suggestion.examples_used,
        prompt_token_count: outcome.suggestion.prompt_token_count,
        truncated: outcome.prompt.truncated,
    }))
}

#[derive(Debug, serde::Deserialize)]
struct SimilarQuery {
    #[serde(default)]
    k: Option<usize>,
}

async fn handle_similar(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Query(query): Query<SimilarQuery>,
) -> Result<Json<Vec<SearchHit>>, ApiError> {
    let (_, index) = state.snapshot();
    let Some(index) = index else {
        return Err(ApiError::index_absent());
    };
    let Some(vector) = index.vector_of(&id) else {
        return Err(ApiError::new(
            StatusCode::NOT_FOUND,
            format!("unknown incident id {id:?}"),
        ));
    };
    let k = query.k.unwrap_or(state.config.default_k);
    let hits = index
        .search(&vector, k + 1)
        .map_err(|e| ApiError::unprocessable(e.to_string()))?
        .into_iter()
        .filter(|hit| hit.id != id)
        .take(k)
        .collect();
    Ok(Json(hits))
}

#[derive(Debug, serde::Deserialize)]
struct EvaluateRequest {
    pairs: Vec<crate::io::EvalPair>,
}

async fn handle_evaluate(
    payload: Result<Json<EvaluateRequest>, JsonRejection>,
) -> Result<Json<rca_core::metrics::MetricReport>, ApiError> {
    let Json(request) = payload?;
    let pairs: Vec<(String, String)> = request
        .pairs
        .into_iter()
        .map(|p| (p.candidate, p.reference))
        .collect();
    let report =
        evaluate_corpus(&pairs).map_err(|e| ApiError::unprocessable(e.to_string()))?;
    Ok(Json(report))
}

#[derive(Debug, serde::Deserialize)]
struct IndexBuildRequest {
    /// Summarized corpus to index; defaults to the configured corpus path.
    #[serde(default)]
    corpus_path: Option<PathBuf>,
    #[serde(default)]
    quantized: bool,
    /// Persist the rebuilt index to the configured index path.
    #[serde(default = "default_true")]
    persist: bool,
}

fn default_true() -> bool {
    true
}

#[derive(Debug, serde::Serialize)]
struct IndexBuildResponse {
    count: usize,
    dimension: usize,
    quantized: bool,
}

async fn handle_index_build(
    State(state): State<AppState>,
    payload: Result<Json<IndexBuildRequest>, JsonRejection>,
) -> Result<Json<IndexBuildResponse>, ApiError> {
    let Json(request) = payload?;
    let path = request
        .corpus_path
        .unwrap_or_else(|| state.config.corpus_path.clone());
    let worker_state = state.clone();
    let (index, corpus) = tokio::task::spawn_blocking(move || {
        let (incidents, _) = load_incidents(&path)?;
        if incidents.is_empty() {
            return Err(ServiceError::Config(format!(
                "{} holds no incidents",
                path.display()
            )));
        }
        for incident in &incidents {
            if incident.summary_short.is_none() {
                return Err(ServiceError::Config(format!(
                    "incident {} is not summarized; run summarization first",
                    incident.id
                )));
            }
        }
        let index =
            rca_core::experiment::build_retrieval_index(&incidents, worker_state.embedder.as_ref())
                .map_err(|e| ServiceError::Config(e.to_string()))?;
        let index = if request.quantized {
            match index {
                IndexKind::Flat(flat) => IndexKind::Quantized(rca_core::index::quantize(&flat)),
                other => other,
            }
        } else {
            index
        };
        if request.persist {
            save_index(&worker_state.config.index_path, &index)?;
        }
        let corpus: BTreeMap<String, Incident> = incidents
            .into_iter()
            .map(|incident| (incident.id.clone(), incident))
            .collect();
        Ok((index, corpus))
    })
    .await
    .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?
    .map_err(|e: ServiceError| ApiError::unprocessable(e.to_string()))?;

    let response = IndexBuildResponse {
        count: index.len(),
        dimension: index.dimension(),
        quantized: matches!(index, IndexKind::Quantized(_)),
    };
    let mut loaded = state.loaded.write().expect("state lock");
    *loaded = Loaded {
        corpus: Arc::new(corpus),
        index: Some(Arc::new(index)),
    };
    drop(loaded);
    tracing::info!(count = response.count, "index swapped");
    Ok(Json(response))
}
