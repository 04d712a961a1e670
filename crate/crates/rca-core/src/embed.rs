//! Unit-norm incident embeddings.
//!
//! Query text is the incident title concatenated with its short summary.
//! Two embedders exist behind the [`Embedder`] trait: a remote provider
//! (implemented in the companion crate) and [`LocalHashEmbedder`], a
//! deterministic signed feature-hashing scheme over unigrams and bigrams
//! that gives graded similarity without any model or network access.
//!
//! Every embedding is L2-normalized, so squared Euclidean distance and
//! cosine relevance are interconvertible (d² = 2 − 2·cos).

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::incident::Incident;

/// Default embedding width.
pub const DEFAULT_DIMENSION: usize = 768;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum EmbedError {
    #[error("cannot embed empty text")]
    EmptyText,
    #[error("text has no tokens after normalization")]
    NoTokens,
    #[error("embedding dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("embedding dimension must be positive")]
    ZeroDimension,
    #[error("feature weights cancelled to a zero vector")]
    DegenerateVector,
    #[error("incident {0} has no short summary; summarize before querying")]
    MissingSummaryShort(String),
    #[error("remote embedder requires an endpoint")]
    MissingEndpoint,
    #[error("embedding provider failure: {0}")]
    Provider(String),
}

/// A dense unit vector. Construction normalizes, so the L2 norm is 1 within
/// 1e-6 by invariant.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct EmbeddingVector {
    values: Vec<f32>,
}

impl EmbeddingVector {
    /// Normalize `values` to unit length. Errors if the norm is zero.
    pub fn from_unnormalized(values: &[f64]) -> Result<Self, EmbedError> {
        let norm = libm::sqrt(values.iter().map(|v| v * v).sum::<f64>());
        if norm == 0.0 {
            return Err(EmbedError::DegenerateVector);
        }
        Ok(EmbeddingVector {
            values: values.iter().map(|v| (v / norm) as f32).collect(),
        })
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    pub fn dimension(&self) -> usize {
        self.values.len()
    }

    pub fn norm(&self) -> f64 {
        libm::sqrt(self.values.iter().map(|v| {
            let v = *v as f64;
            v * v
        }).sum::<f64>())
    }
}

/// Embedding backend selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EmbedderMode {
    Remote,
    LocalHash,
}

/// Declarative embedder configuration; the companion crate turns `Remote`
/// configs into HTTP-backed embedders.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct EmbedderConfig {
    pub mode: EmbedderMode,
    pub dimension: usize,
    pub endpoint: Option<String>,
    pub seed: u64,
}

impl Default for EmbedderConfig {
    fn default() -> Self {
        EmbedderConfig {
            mode: EmbedderMode::LocalHash,
            dimension: DEFAULT_DIMENSION,
            endpoint: None,
            seed: 0,
        }
    }
}

impl EmbedderConfig {
    pub fn validate(&self) -> Result<(), EmbedError> {
        if self.dimension == 0 {
            return Err(EmbedError::ZeroDimension);
        }
        if self.mode == EmbedderMode::Remote && self.endpoint.is_none() {
            return Err(EmbedError::MissingEndpoint);
        }
        Ok(())
    }
}

/// Text-to-vector backend. Implementations must be deterministic for a given
/// configuration and return vectors of their declared dimension.
pub trait Embedder: Send + Sync {
    fn id(&self) -> &str;
    fn dimension(&self) -> usize;
    fn embed(&self, text: &str) -> Result<EmbeddingVector, EmbedError>;
}

/// Query text for retrieval: `title`, newline, short summary.
pub fn build_query_text(incident: &Incident) -> Result<String, EmbedError> {
    let short = incident
        .summary_short
        .as_deref()
        .ok_or_else(|| EmbedError::MissingSummaryShort(incident.id.clone()))?;
    Ok(alloc::format!("{}\n{}", incident.title, short))
}

/// Embed non-empty text, enforcing the embedder's declared dimension.
pub fn embed_text(embedder: &dyn Embedder, text: &str) -> Result<EmbeddingVector, EmbedError> {
    if text.is_empty() {
        return Err(EmbedError::EmptyText);
    }
    let vector = embedder.embed(text)?;
    if vector.dimension() != embedder.dimension() {
        return Err(EmbedError::DimensionMismatch {
            expected: embedder.dimension(),
            actual: vector.dimension(),
        });
    }
    Ok(vector)
}

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;
/// Mixed into the second hash so bucket and sign are independent.
const SIGN_SALT: u64 = 0x9e37_79b9_7f4a_7c15;

fn fnv1a(bytes: &[u8], seed: u64) -> u64 {
    let mut hash = FNV_OFFSET ^ seed;
    for &byte in bytes {
        hash ^= byte as u64;
        hash = hash.wrapping_mul(FNV_PRIME);
    }
    hash
}

fn tokenize(text: &str) -> Vec<String> {
    text.to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(|t| t.to_string())
        .collect()
}

/// Signed feature hashing over unigrams and adjacent bigrams: FNV-1a 64
/// (seed-mixed) picks the bucket, the top bit of a salted second hash picks
/// the sign, and occurrence counts accumulate before L2 normalization.
pub fn hash_embed(text: &str, dimension: usize, seed: u64) -> Result<EmbeddingVector, EmbedError> {
    if dimension == 0 {
        return Err(EmbedError::ZeroDimension);
    }
    let tokens = tokenize(text);
    if tokens.is_empty() {
        return Err(EmbedError::NoTokens);
    }
    let mut accumulator = alloc::vec![0.0f64; dimension];
    let mut add_feature = |bytes: &[u8]| {
        let bucket = (fnv1a(bytes, seed) % dimension as u64) as usize;
        let sign = if fnv1a(bytes, seed ^ SIGN_SALT) >> 63 == 0 {
            1.0
        } else {
            -1.0
        };
        accumulator[bucket] += sign;
    };
    for token in &tokens {
        add_feature(token.as_bytes());
    }
    for pair in tokens.windows(2) {
        let mut feature = Vec::with_capacity(pair[0].len() + pair[1].len() + 1);
        feature.extend_from_slice(pair[0].as_bytes());
        feature.push(0x1f);
        feature.extend_from_slice(pair[1].as_bytes());
        add_feature(&feature);
    }
    EmbeddingVector::from_unnormalized(&accumulator)
}

/// Deterministic offline embedder backed by [`hash_embed`].
#[derive(Debug, Clone)]
pub struct LocalHashEmbedder {
    dimension: usize,
    seed: u64,
    id: String,
}

impl LocalHashEmbedder {
    pub fn new(dimension: usize, seed: u64) -> Result<Self, EmbedError> {
        if dimension == 0 {
            return Err(EmbedError::ZeroDimension);
        }
        Ok(LocalHashEmbedder {
            dimension,
            seed,
            id: alloc::format!("local-hash-d{dimension}-s{seed}"),
        })
    }
}

impl Embedder for LocalHashEmbedder {
    fn id(&self) -> &str {
        &self.id
    }

    fn dimension(&self) -> usize {
        self.dimension
    }

    fn embed(&self, text: &str) -> Result<EmbeddingVector, EmbedError> {
        hash_embed(text, self.dimension, self.seed)
    }
}
