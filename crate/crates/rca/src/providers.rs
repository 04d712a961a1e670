//! Remote providers: completion, embedding, and external semantic scoring
//! over HTTP, plus factories that turn configuration into boxed backends.
//!
//! Wire shapes are deliberately small. Completion: POST `{model, prompt,
//! temperature, max_tokens}` (or a chat-style `{model, messages, ...}` body)
//! returning `{"text": ...}`. Embedding: POST `{input, dimension}` returning
//! `{"vector": [...]}`. Scoring: POST `{pairs: [{candidate, reference}]}`
//! returning `{"scores": [...]}`. The `RCA_API_KEY` environment variable is
//! sent as a bearer token when present.

use std::time::Duration;

use rca_core::embed::{EmbedError, Embedder, EmbedderConfig, EmbedderMode, EmbeddingVector};
use rca_core::metrics::{MetricsError, SemanticScorer};
use rca_core::provider::{CompletionProvider, CompletionRequest, ProviderError};
use rca_core::summarize::ExtractiveSummaryProvider;

/// Environment variable that overrides configured provider credentials.
pub const API_KEY_ENV: &str = "RCA_API_KEY";

const DEFAULT_TIMEOUT: Duration = Duration::from_secs(60);
const DEFAULT_RETRIES: u32 = 3;

fn api_key() -> Option<String> {
    std::env::var(API_KEY_ENV).ok().filter(|k| !k.is_empty())
}

fn blocking_client() -> Result<reqwest::blocking::Client, ProviderError> {
    reqwest::blocking::Client::builder()
        .timeout(DEFAULT_TIMEOUT)
        .build()
        .map_err(|e| ProviderError::Transport(e.to_string()))
}

/// Request body shape for completion providers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RequestStyle {
    /// `{"model", "prompt", "temperature", "max_tokens"}`
    Completion,
    /// `{"model", "messages": [system, user], "temperature", "max_tokens"}`
    Chat,
}

#[derive(Debug, serde::Deserialize)]
struct TextResponse {
    text: String,
}

/// HTTP-backed completion provider with bounded retries and exponential
/// backoff. Only transport-level failures and 429/5xx responses are
/// retried; a successful completion is final (at-most-once semantics).
pub struct RemoteCompletionProvider {
    endpoint: String,
    style: RequestStyle,
    retries: u32,
    id: String,
}

impl RemoteCompletionProvider {
    pub fn new(endpoint: &str, model_id: &str, style: RequestStyle) -> Self {
        RemoteCompletionProvider {
            endpoint: endpoint.to_string(),
            style,
            retries: DEFAULT_RETRIES,
            id: format!("remote-{model_id}"),
        }
    }

    fn body(&self, request: &CompletionRequest<'_>) -> serde_json::Value {
        match self.style {
            RequestStyle::Completion => serde_json::json!({
                "model": request.model_id,
                "prompt": request.prompt,
                "temperature": request.temperature,
                "max_tokens": request.max_tokens,
            }),
            RequestStyle::Chat => serde_json::json!({
                "model": request.model_id,
                "messages": [
                    {"role": "system", "content": "You are a software engineer diagnosing production incidents."},
                    {"role": "user", "content": request.prompt},
                ],
                "temperature": request.temperature,
                "max_tokens": request.max_tokens,
            }),
        }
    }

    fn send_once(&self, request: &CompletionRequest<'_>) -> Result<String, RetryDecision> {
        let client = blocking_client().map_err(RetryDecision::Give)?;
        let mut builder = client.post(&self.endpoint).json(&self.body(request));
        if let Some(key) = api_key() {
            builder = builder.bearer_auth(key);
        }
        let response = builder
            .send()
            .map_err(|e| RetryDecision::Retry(ProviderError::Transport(e.to_string())))?;
        let status = response.status();
        if status.as_u16() == 413 {
            return Err(RetryDecision::Give(ProviderError::ContextOverflow));
        }
        if status.as_u16() == 429 || status.is_server_error() {
            return Err(RetryDecision::Retry(ProviderError::Transport(format!(
                "status {status}"
            ))));
        }
        if !status.is_success() {
            return Err(RetryDecision::Give(ProviderError::Protocol(format!(
                "status {status}"
            ))));
        }
        let parsed: TextResponse = response
            .json()
            .map_err(|e| RetryDecision::Give(ProviderError::Protocol(e.to_string())))?;
        Ok(parsed.text)
    }
}

enum RetryDecision {
    Retry(ProviderError),
    Give(ProviderError),
}

impl CompletionProvider for RemoteCompletionProvider {
    fn id(&self) -> &str {
        &self.id
    }

    fn complete(&self, request: &CompletionRequest<'_>) -> Result<String, ProviderError> {
        let mut last = ProviderError::Transport("no attempts made".into());
        for attempt in 0..=self.retries {
            match self.send_once(request) {
                Ok(text) => return Ok(text),
                Err(RetryDecision::Give(error)) => return Err(error),
                Err(RetryDecision::Retry(error)) => {
                    last = error;
                    if attempt < self.retries {
                        std::thread::sleep(Duration::from_millis(500 << attempt));
                    }
                }
            }
        }
        Err(last)
    }
}

#[derive(Debug, serde::Deserialize)]
struct VectorResponse {
    vector: Vec<f64>,
}

/// HTTP-backed embedder; provider vectors are L2-normalized on receipt.
pub struct RemoteEmbedder {
    endpoint: String,
    dimension: usize,
    id: String,
}

impl RemoteEmbedder {
    pub fn new(endpoint: &str, dimension: usize) -> Self {
        RemoteEmbedder {
            endpoint: endpoint.to_string(),
            dimension,
            id: format!("remote-embed-d{dimension}"),
        }
    }
}

impl Embedder for RemoteEmbedder {
    fn id(&self) -> &str {
        &self.id
    }

    fn dimension(&self) -> usize {
        self.dimension
    }

    fn embed(&self, text: &str) -> Result<EmbeddingVector, EmbedError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(DEFAULT_TIMEOUT)
            .build()
            .map_err(|e| EmbedError::Provider(e.to_string()))?;
        let mut builder = client.post(&self.endpoint).json(&serde_json::json!({
            "input": text,
            "dimension": self.dimension,
        }));
        if let Some(key) = api_key() {
            builder = builder.bearer_auth(key);
        }
        let response = builder
            .send()
            .map_err(|e| EmbedError::Provider(e.to_string()))?;
        if !response.status().is_success() {
            return Err(EmbedError::Provider(format!(
                "status {}",
                response.status()
            )));
        }
        let parsed: VectorResponse = response
            .json()
            .map_err(|e| EmbedError::Provider(e.to_string()))?;
        if parsed.vector.len() != self.dimension {
            return Err(EmbedError::DimensionMismatch {
                expected: self.dimension,
                actual: parsed.vector.len(),
            });
        }
        EmbeddingVector::from_unnormalized(&parsed.vector)
    }
}

#[derive(Debug, serde::Deserialize)]
struct ScoresResponse {
    scores: Vec<f64>,
}

/// External semantic scorer (BERTScore / NUBIA class) behind an endpoint.
pub struct HttpSemanticScorer {
    name: String,
    endpoint: String,
}

impl HttpSemanticScorer {
    pub fn new(name: &str, endpoint: &str) -> Self {
        HttpSemanticScorer {
            name: name.to_string(),
            endpoint: endpoint.to_string(),
        }
    }
}

impl SemanticScorer for HttpSemanticScorer {
    fn name(&self) -> &str {
        &self.name
    }

    fn score_pairs(&self, pairs: &[(String, String)]) -> Result<Vec<f64>, MetricsError> {
        let external = |reason: String| MetricsError::External {
            name: self.name.clone(),
            reason,
        };
        let body = serde_json::json!({
            "pairs": pairs
                .iter()
                .map(|(candidate, reference)| {
                    serde_json::json!({"candidate": candidate, "reference": reference})
                })
                .collect::<Vec<_>>(),
        });
        let client = reqwest::blocking::Client::builder()
            .timeout(DEFAULT_TIMEOUT)
            .build()
            .map_err(|e| external(e.to_string()))?;
        let mut builder = client.post(&self.endpoint).json(&body);
        if let Some(key) = api_key() {
            builder = builder.bearer_auth(key);
        }
        let response = builder.send().map_err(|e| external(e.to_string()))?;
        if !response.status().is_success() {
            return Err(external(format!("status {}", response.status())));
        }
        let parsed: ScoresResponse = response.json().map_err(|e| external(e.to_string()))?;
        Ok(parsed.scores)
    }
}

/// Provider selection in config files and CLI flags.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum ProviderConfig {
    /// Offline extractive summarizer (first `sentences` sentences).
    Extractive { sentences: usize },
    /// Offline generator echoing the first in-context example.
    Mock,
    /// HTTP completion endpoint.
    Remote {
        endpoint: String,
        model_id: String,
        style: RequestStyle,
    },
}

impl ProviderConfig {
    pub fn build(&self) -> Box<dyn CompletionProvider> {
        match self {
            ProviderConfig::Extractive { sentences } => {
                Box::new(ExtractiveSummaryProvider::new(*sentences))
            }
            ProviderConfig::Mock => Box::new(rca_core::generate::MockRcaProvider),
            ProviderConfig::Remote {
                endpoint,
                model_id,
                style,
            } => Box::new(RemoteCompletionProvider::new(endpoint, model_id, *style)),
        }
    }
}

/// Turn an embedder config into a backend.
pub fn embedder_from_config(config: &EmbedderConfig) -> Result<Box<dyn Embedder>, EmbedError> {
    config.validate()?;
    match config.mode {
        EmbedderMode::LocalHash => Ok(Box::new(rca_core::embed::LocalHashEmbedder::new(
            config.dimension,
            config.seed,
        )?)),
        EmbedderMode::Remote => {
            let endpoint = config.endpoint.as_deref().ok_or(EmbedError::MissingEndpoint)?;
            Ok(Box::new(RemoteEmbedder::new(endpoint, config.dimension)))
        }
    }
}
