//! In-context example retrieval and the chunked-passage baseline.
//!
//! `retrieve_examples` turns nearest-neighbor hits into (title, summary,
//! root cause) triples ready for prompt assembly, either by relevance or by
//! seeded uniform sampling (the control arm). The query incident itself is
//! always excluded so experiments cannot leak labels. `chunk_corpus` and
//! `retrieve_chunks` implement the baseline that feeds fixed-size passages
//! instead of structured examples.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;

use crate::embed::{build_query_text, embed_text, EmbedError, Embedder};
use crate::incident::Incident;
use crate::index::{IndexError, IndexKind};
use crate::prompt::TokenCounter;
use crate::randutil::uniform_index;

/// One retrieved historical incident, ready to drop into a prompt.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct InContextExample {
    pub incident_id: String,
    pub title: String,
    pub summary_short: String,
    pub root_cause_short: String,
    pub relevance: f64,
}

/// A fixed-token-window slice of one incident's combined text.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Chunk {
    pub chunk_id: String,
    pub source_incident_id: String,
    pub text: String,
    pub token_count: usize,
}

/// How in-context examples are selected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionMode {
    Relevant,
    Random,
}

/// One relevance-histogram bucket over [lo, hi).
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct HistogramBin {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
    pub fraction: f64,
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum RetrieveError {
    #[error(transparent)]
    Embed(#[from] EmbedError),
    #[error(transparent)]
    Index(#[from] IndexError),
    #[error("requested {requested} random examples but only {available} candidates exist")]
    NotEnoughCandidates { requested: usize, available: usize },
    #[error("index hit {0} is not present in the corpus")]
    UnknownCorpusId(String),
    #[error("incident {0} lacks a summarized title/summary/root cause")]
    IncompleteExample(String),
    #[error("corpus incident {0} is not present in the index")]
    NotIndexed(String),
    #[error("chunk id {0} is not present in the chunk table")]
    UnknownChunk(String),
    #[error("chunk size must be at least one token")]
    ZeroChunkSize,
    #[error("a single token of incident {0} exceeds the chunk size")]
    TokenExceedsChunkSize(String),
    #[error("relevance histogram needs at least one incident")]
    EmptyInput,
    #[error("histogram bin width must be in (0, 1]")]
    InvalidBinWidth,
    #[error("corpus has no neighbor for incident {0}")]
    NoNeighbor(String),
}

fn example_from(incident: &Incident, relevance: f64) -> Result<InContextExample, RetrieveError> {
    let summary_short = incident.summary_short.as_deref().unwrap_or("");
    let root_cause_short = incident.root_cause_short.as_deref().unwrap_or("");
    if incident.title.is_empty() || summary_short.is_empty() || root_cause_short.is_empty() {
        return Err(RetrieveError::IncompleteExample(incident.id.clone()));
    }
    Ok(InContextExample {
        incident_id: incident.id.clone(),
        title: incident.title.clone(),
        summary_short: summary_short.to_string(),
        root_cause_short: root_cause_short.to_string(),
        relevance,
    })
}

/// Select `k` in-context examples for `incident`, excluding the incident
/// itself. `Relevant` takes the nearest neighbors (relevance descending);
/// `Random` draws `k` distinct corpus incidents with a seeded uniform sample
/// and fills their relevance from the index.
pub fn retrieve_examples(
    index: &IndexKind,
    embedder: &dyn Embedder,
    corpus: &BTreeMap<String, Incident>,
    incident: &Incident,
    k: usize,
    mode: SelectionMode,
    seed: u64,
) -> Result<Vec<InContextExample>, RetrieveError> {
    if k == 0 {
        return Ok(Vec::new());
    }
    let query_text = build_query_text(incident)?;
    let query = embed_text(embedder, &query_text)?;
    match mode {
        SelectionMode::Relevant => {
            let hits = index.search(query.values(), k + 1)?;
            hits.into_iter()
                .filter(|hit| hit.id != incident.id)
                .take(k)
                .map(|hit| {
                    let source = corpus
                        .get(&hit.id)
                        .ok_or_else(|| RetrieveError::UnknownCorpusId(hit.id.clone()))?;
                    example_from(source, hit.relevance)
                })
                .collect()
        }
        SelectionMode::Random => {
            let mut pool: Vec<&String> =
                corpus.keys().filter(|id| **id != incident.id).collect();
            if k > pool.len() {
                return Err(RetrieveError::NotEnoughCandidates {
                    requested: k,
                    available: pool.len(),
                });
            }
            // Partial Fisher-Yates over the sorted pool: the first k slots
            // are a uniform sample, reproducible for a given seed.
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for i in 0..k {
                let j = i + uniform_index(&mut rng, pool.len() - i);
                pool.swap(i, j);
            }
            pool[..k]
                .iter()
                .map(|id| {
                    let source = corpus
                        .get(*id)
                        .expect("pool ids come from the corpus");
                    let hit = index
                        .relevance_of(query.values(), id)
                        .ok_or_else(|| RetrieveError::NotIndexed((*id).clone()))?;
                    example_from(source, hit.relevance)
                })
                .collect()
        }
    }
}

/// Combined text used for both chunking and chunk embedding.
pub fn combined_incident_text(incident: &Incident) -> Result<String, RetrieveError> {
    let summary_short = incident
        .summary_short
        .as_deref()
        .filter(|s| !s.is_empty())
        .ok_or_else(|| RetrieveError::IncompleteExample(incident.id.clone()))?;
    let root_cause_short = incident
        .root_cause_short
        .as_deref()
        .filter(|s| !s.is_empty())
        .ok_or_else(|| RetrieveError::IncompleteExample(incident.id.clone()))?;
    Ok(alloc::format!(
        "Title: {}\nSummary: {}\nRoot Cause: {}",
        incident.title,
        summary_short,
        root_cause_short
    ))
}

/// Split every incident's combined text into consecutive windows of at most
/// `chunk_tokens` tokens (the last window may be shorter). Joining one
/// incident's chunks in order reproduces its combined text exactly.
pub fn chunk_corpus(
    corpus: &[Incident],
    chunk_tokens: usize,
    counter: &TokenCounter,
) -> Result<Vec<Chunk>, RetrieveError> {
    if chunk_tokens == 0 {
        return Err(RetrieveError::ZeroChunkSize);
    }
    let mut chunks = Vec::new();
    for incident in corpus {
        let combined = combined_incident_text(incident)?;
        let spans = counter.token_spans(&combined);
        if spans.is_empty() {
            continue;
        }
        // Cut points sit at token starts; each chunk carries the whitespace
        // up to the next cut so concatenation is lossless.
        let mut cuts: Vec<usize> = alloc::vec![0];
        let mut weights: Vec<usize> = Vec::new();
        let mut acc = 0usize;
        for &(offset, weight) in &spans {
            if weight > chunk_tokens {
                return Err(RetrieveError::TokenExceedsChunkSize(incident.id.clone()));
            }
            if acc + weight > chunk_tokens {
                cuts.push(offset);
                weights.push(acc);
                acc = 0;
            }
            acc += weight;
        }
        weights.push(acc);
        cuts.push(combined.len());
        for (i, window) in cuts.windows(2).enumerate() {
            chunks.push(Chunk {
                chunk_id: alloc::format!("{}#{}", incident.id, i),
                source_incident_id: incident.id.clone(),
                text: combined[window[0]..window[1]].to_string(),
                token_count: weights[i],
            });
        }
    }
    Ok(chunks)
}

/// The `m` chunks nearest to the incident's query embedding, ascending by
/// distance (ties by chunk id), excluding chunks of the incident itself.
pub fn retrieve_chunks(
    chunk_index: &IndexKind,
    chunks_by_id: &BTreeMap<String, Chunk>,
    embedder: &dyn Embedder,
    incident: &Incident,
    m: usize,
) -> Result<Vec<Chunk>, RetrieveError> {
    if m == 0 {
        return Ok(Vec::new());
    }
    let query_text = build_query_text(incident)?;
    let query = embed_text(embedder, &query_text)?;
    let hits = chunk_index.search(query.values(), chunk_index.len())?;
    hits.into_iter()
        .filter_map(|hit| match chunks_by_id.get(&hit.id) {
            Some(chunk) if chunk.source_incident_id == incident.id => None,
            Some(chunk) => Some(Ok(chunk.clone())),
            None => Some(Err(RetrieveError::UnknownChunk(hit.id))),
        })
        .take(m)
        .collect()
}

/// For each incident, the relevance of its nearest non-self corpus neighbor,
/// bucketed over [0, 1]. Fractions sum to 1.
pub fn relevance_histogram(
    index: &IndexKind,
    embedder: &dyn Embedder,
    incidents: &[Incident],
    bin_width: f64,
) -> Result<Vec<HistogramBin>, RetrieveError> {
    if incidents.is_empty() {
        return Err(RetrieveError::EmptyInput);
    }
    if !(bin_width > 0.0 && bin_width <= 1.0) {
        return Err(RetrieveError::InvalidBinWidth);
    }
    let bin_count = libm::ceil(1.0 / bin_width) as usize;
    let mut counts = alloc::vec![0usize; bin_count];
    for incident in incidents {
        let query_text = build_query_text(incident)?;
        let query = embed_text(embedder, &query_text)?;
        let best = index
            .search(query.values(), 2)?
            .into_iter()
            .find(|hit| hit.id != incident.id)
            .ok_or_else(|| RetrieveError::NoNeighbor(incident.id.clone()))?;
        let bin = ((best.relevance / bin_width) as usize).min(bin_count - 1);
        counts[bin] += 1;
    }
    let total = incidents.len() as f64;
    Ok(counts
        .iter()
        .enumerate()
        .map(|(i, &count)| HistogramBin {
            lo: i as f64 * bin_width,
            hi: if i + 1 == bin_count {
                1.0
            } else {
                (i + 1) as f64 * bin_width
            },
            count,
            fraction: count as f64 / total,
        })
        .collect())
}
