//! Experiment designs over the offline pipeline: shot-count sweeps,
//! full-prompt filling, relevant-vs-random selection, example ordering, and
//! the chunked-passage baseline.
//!
//! A run walks the test split once per condition: retrieve, order, fit,
//! assemble, generate, score. With offline providers and a fixed seed the
//! entire [`RunResult`] is a pure function of its inputs and serializes
//! bit-identically across runs. Generation failures mark the condition as
//! partial and abort it; they are recorded, never imputed.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use sha2::{Digest, Sha256};

use crate::cleanse::clean_incident;
use crate::embed::{EmbedError, Embedder};
use crate::generate::{generate_root_cause, GenerateError, GenerationConfig};
use crate::incident::{CorpusSplits, Incident};
use crate::index::{build_flat_index, IndexError, IndexKind};
use crate::metrics::{self, MetricsError};
use crate::prompt::{
    assemble_chunked_prompt, assemble_rca_prompt, fit_to_budget, order_examples, FitMode,
    OrderingMode, PromptError, TokenBudget, TokenCounter,
};
use crate::provider::CompletionProvider;
use crate::retrieve::{
    chunk_corpus, retrieve_chunks, retrieve_examples, Chunk, RetrieveError, SelectionMode,
};
use crate::stats::{paired_bootstrap, wilcoxon_signed_rank, StatsError};
use crate::summarize::{summarize_incident, SummarizeError, SummaryCache};

/// Candidate pool size for full-prompt filling.
const FULL_PROMPT_POOL: usize = 256;

/// Which study to run.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub enum Design {
    /// One condition per shot count (`k=0` is the zero-shot row).
    KShotSweep { shots: Vec<usize> },
    /// Fixed 20 shots versus greedy filling up to `limit` prompt tokens.
    FullPrompt { limit: usize },
    /// Relevant top-k, random-k, and zero-shot conditions.
    SelectionStudy { k: usize },
    /// Descending / ascending / shuffled arrangements of the same top-k.
    OrderingStudy { k: usize },
    /// Chunked-passage baseline, one condition per chunk count.
    ChunkedBaseline {
        chunk_counts: Vec<usize>,
        chunk_tokens: usize,
    },
}

/// Everything that determines a run, serializable for the run manifest.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ExperimentConfig {
    pub design: Design,
    pub prompt_limit: usize,
    pub completion_reserve: usize,
    /// Token counter id (`whitespace` or `chars:<n>`).
    pub counter_id: String,
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn new(design: Design) -> Self {
        ExperimentConfig {
            design,
            prompt_limit: crate::prompt::PROMPT_LIMIT_8K,
            completion_reserve: crate::prompt::DEFAULT_COMPLETION_RESERVE,
            counter_id: "whitespace".to_string(),
            seed: 0,
        }
    }
}

/// Offline or remote backends for one run.
pub struct ExperimentProviders<'a> {
    pub summarizer: &'a dyn CompletionProvider,
    pub generator: &'a dyn CompletionProvider,
    pub cache: &'a dyn SummaryCache,
    pub embedder: &'a dyn Embedder,
}

/// Scores for one test incident under one condition.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PairOutcome {
    pub incident_id: String,
    pub scores: BTreeMap<String, f64>,
}

/// One condition row: per-incident scores plus their means.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct RunRow {
    pub label: String,
    pub means: BTreeMap<String, f64>,
    pub per_pair: Vec<PairOutcome>,
    pub partial: bool,
}

/// A provider failure that aborted a condition.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PartialFailure {
    pub condition: String,
    pub incident_id: String,
    pub error: String,
}

/// Full experiment output: rows, failures, config echo, and provenance.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct RunResult {
    pub rows: Vec<RunRow>,
    pub failures: Vec<PartialFailure>,
    pub config: ExperimentConfig,
    pub corpus_hash: String,
    pub summarizer_id: String,
    pub generator_id: String,
    pub embedder_id: String,
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ExperimentError {
    #[error("retrieval split is empty")]
    EmptyRetrievalSplit,
    #[error("test split is empty")]
    EmptyTestSplit,
    #[error("no row labelled {0:?} in this run")]
    UnknownRow(String),
    #[error("rows share no incidents to pair")]
    NoSharedIncidents,
    #[error("metric {0:?} missing from row")]
    MissingMetric(String),
    #[error(transparent)]
    Prompt(#[from] PromptError),
    #[error(transparent)]
    Retrieve(#[from] RetrieveError),
    #[error(transparent)]
    Embed(#[from] EmbedError),
    #[error(transparent)]
    Index(#[from] IndexError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error(transparent)]
    Summarize(#[from] SummarizeError),
}

enum ConditionKind {
    FewShot {
        k: usize,
        mode: SelectionMode,
        ordering: OrderingMode,
        fit: FitMode,
        prompt_limit: Option<usize>,
    },
    Chunked {
        m: usize,
    },
}

struct Condition {
    label: String,
    kind: ConditionKind,
}

fn conditions_for(design: &Design, seed: u64) -> Vec<Condition> {
    let relevant = |k, ordering, fit, prompt_limit, label: String| Condition {
        label,
        kind: ConditionKind::FewShot {
            k,
            mode: SelectionMode::Relevant,
            ordering,
            fit,
            prompt_limit,
        },
    };
    match design {
        Design::KShotSweep { shots } => shots
            .iter()
            .map(|&k| {
                relevant(
                    k,
                    OrderingMode::DescendingRelevance,
                    FitMode::FixedK,
                    None,
                    alloc::format!("k={k}"),
                )
            })
            .collect(),
        Design::FullPrompt { limit } => alloc::vec![
            relevant(
                20,
                OrderingMode::DescendingRelevance,
                FitMode::FixedK,
                None,
                "20 shots".to_string(),
            ),
            relevant(
                FULL_PROMPT_POOL,
                OrderingMode::DescendingRelevance,
                FitMode::FullPrompt,
                Some(*limit),
                alloc::format!("full prompt ({limit})"),
            ),
        ],
        Design::SelectionStudy { k } => alloc::vec![
            relevant(
                *k,
                OrderingMode::DescendingRelevance,
                FitMode::FixedK,
                None,
                alloc::format!("relevant-{k}"),
            ),
            Condition {
                label: alloc::format!("random-{k}"),
                kind: ConditionKind::FewShot {
                    k: *k,
                    mode: SelectionMode::Random,
                    ordering: OrderingMode::DescendingRelevance,
                    fit: FitMode::FixedK,
                    prompt_limit: None,
                },
            },
            relevant(
                0,
                OrderingMode::DescendingRelevance,
                FitMode::FixedK,
                None,
                "zero-shot".to_string(),
            ),
        ],
        Design::OrderingStudy { k } => alloc::vec![
            relevant(
                *k,
                OrderingMode::DescendingRelevance,
                FitMode::FixedK,
                None,
                "descending".to_string(),
            ),
            relevant(
                *k,
                OrderingMode::AscendingRelevance,
                FitMode::FixedK,
                None,
                "ascending".to_string(),
            ),
            relevant(
                *k,
                OrderingMode::ShuffledSeeded(seed),
                FitMode::FixedK,
                None,
                "shuffled".to_string(),
            ),
        ],
        Design::ChunkedBaseline { chunk_counts, .. } => chunk_counts
            .iter()
            .map(|&m| Condition {
                label: alloc::format!("chunked-{m}"),
                kind: ConditionKind::Chunked { m },
            })
            .collect(),
    }
}

/// SHA-256 over every incident record of all three splits, in split order.
pub fn corpus_hash(splits: &CorpusSplits) -> String {
    let mut hasher = Sha256::new();
    for incident in splits
        .retrieval
        .iter()
        .chain(&splits.validation)
        .chain(&splits.test)
    {
        hasher.update(incident.to_json_line().as_bytes());
        hasher.update([b'\n']);
    }
    hex::encode(hasher.finalize())
}

/// Clean and summarize a query incident as needed so it carries the short
/// fields used for retrieval queries and evaluation references.
pub fn prepare_query_incident(
    incident: &Incident,
    summarizer: &dyn CompletionProvider,
    cache: &dyn SummaryCache,
) -> Result<Incident, SummarizeError> {
    if incident.summary_short.is_some() && incident.root_cause_short.is_some() {
        return Ok(incident.clone());
    }
    let cleaned = if incident.summary_clean.is_some() && incident.root_cause_clean.is_some() {
        incident.clone()
    } else {
        clean_incident(incident).0
    };
    summarize_incident(summarizer, cache, &cleaned)
}

/// Ground-truth text a suggestion is scored against: the summarized root
/// cause when present, else the cleaned one, else the raw field.
pub fn reference_root_cause(incident: &Incident) -> &str {
    incident
        .root_cause_short
        .as_deref()
        .or(incident.root_cause_clean.as_deref())
        .unwrap_or(&incident.root_cause_raw)
}

/// Run every condition of `config.design` over the test split.
pub fn run_experiment(
    config: &ExperimentConfig,
    splits: &CorpusSplits,
    index: &IndexKind,
    providers: &ExperimentProviders<'_>,
) -> Result<RunResult, ExperimentError> {
    if splits.retrieval.is_empty() {
        return Err(ExperimentError::EmptyRetrievalSplit);
    }
    if splits.test.is_empty() {
        return Err(ExperimentError::EmptyTestSplit);
    }
    let counter = TokenCounter::from_id(&config.counter_id)?;
    let budget = TokenBudget::new(config.prompt_limit, config.completion_reserve, counter.clone())?;
    let corpus: BTreeMap<String, Incident> = splits
        .retrieval
        .iter()
        .map(|incident| (incident.id.clone(), incident.clone()))
        .collect();
    let queries: Vec<Incident> = splits
        .test
        .iter()
        .map(|incident| prepare_query_incident(incident, providers.summarizer, providers.cache))
        .collect::<Result<_, _>>()?;

    let generation = GenerationConfig {
        model_id: providers.generator.id().to_string(),
        ..GenerationConfig::default()
    };

    // The chunk table and index are shared by all chunked conditions.
    let chunk_setup = match &config.design {
        Design::ChunkedBaseline { chunk_tokens, .. } => {
            Some(build_chunk_index(splits, *chunk_tokens, &counter, providers.embedder)?)
        }
        _ => None,
    };

    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for condition in conditions_for(&config.design, config.seed) {
        let mut pair_ids: Vec<String> = Vec::new();
        let mut pairs: Vec<(String, String)> = Vec::new();
        let mut partial = false;
        for query in &queries {
            let outcome = match &condition.kind {
                ConditionKind::FewShot {
                    k,
                    mode,
                    ordering,
                    fit,
                    prompt_limit,
                } => run_few_shot(
                    query,
                    index,
                    &corpus,
                    providers,
                    &budget,
                    &generation,
                    *k,
                    *mode,
                    *ordering,
                    *fit,
                    *prompt_limit,
                    config.seed,
                ),
                ConditionKind::Chunked { m } => {
                    let (chunk_index, chunks_by_id) =
                        chunk_setup.as_ref().expect("chunk setup exists");
                    run_chunked(
                        query,
                        chunk_index,
                        chunks_by_id,
                        providers,
                        &budget,
                        &generation,
                        *m,
                    )
                }
            };
            match outcome {
                Ok(suggestion_text) => {
                    pair_ids.push(query.id.clone());
                    pairs.push((suggestion_text, reference_root_cause(query).to_string()));
                }
                Err(StepError::Provider(error)) => {
                    failures.push(PartialFailure {
                        condition: condition.label.clone(),
                        incident_id: query.id.clone(),
                        error: error.to_string(),
                    });
                    partial = true;
                    break;
                }
                Err(StepError::Fatal(error)) => return Err(error),
            }
        }
        let (per_pair, means) = if pairs.is_empty() {
            (Vec::new(), BTreeMap::new())
        } else {
            let report = metrics::evaluate_corpus(&pairs)?;
            let per_pair = pair_ids
                .into_iter()
                .zip(report.per_pair)
                .map(|(incident_id, pair)| PairOutcome {
                    incident_id,
                    scores: pair.scores,
                })
                .collect();
            (per_pair, report.means)
        };
        rows.push(RunRow {
            label: condition.label,
            means,
            per_pair,
            partial,
        });
    }
    Ok(RunResult {
        rows,
        failures,
        config: config.clone(),
        corpus_hash: corpus_hash(splits),
        summarizer_id: providers.summarizer.id().to_string(),
        generator_id: providers.generator.id().to_string(),
        embedder_id: providers.embedder.id().to_string(),
    })
}

enum StepError {
    /// Provider trouble: recorded as a partial failure, condition aborts.
    Provider(GenerateError),
    /// Anything else is a configuration or data bug and fails the run.
    Fatal(ExperimentError),
}

impl From<RetrieveError> for StepError {
    fn from(e: RetrieveError) -> Self {
        StepError::Fatal(e.into())
    }
}

impl From<PromptError> for StepError {
    fn from(e: PromptError) -> Self {
        StepError::Fatal(e.into())
    }
}

#[allow(clippy::too_many_arguments)]
fn run_few_shot(
    query: &Incident,
    index: &IndexKind,
    corpus: &BTreeMap<String, Incident>,
    providers: &ExperimentProviders<'_>,
    budget: &TokenBudget,
    generation: &GenerationConfig,
    k: usize,
    mode: SelectionMode,
    ordering: OrderingMode,
    fit: FitMode,
    prompt_limit: Option<usize>,
    seed: u64,
) -> Result<String, StepError> {
    let condition_budget = match prompt_limit {
        Some(limit) => TokenBudget::new(limit, budget.completion_reserve, budget.counter.clone())
            .map_err(StepError::from)?,
        None => budget.clone(),
    };
    let candidates =
        retrieve_examples(index, providers.embedder, corpus, query, k, mode, seed)?;
    // Randomly selected examples keep their draw order: re-sorting the
    // control arm by relevance would leak relevance back into it.
    let selected = match (mode, fit) {
        (SelectionMode::Random, _) => candidates,
        (SelectionMode::Relevant, FitMode::FixedK) => order_examples(&candidates, ordering),
        (SelectionMode::Relevant, FitMode::FullPrompt) => {
            let filled = fit_to_budget(&candidates, query, &condition_budget, FitMode::FullPrompt);
            order_examples(&filled.kept, ordering)
        }
    };
    let prompt = assemble_rca_prompt(&selected, query, &condition_budget)?;
    generate_root_cause(providers.generator, &prompt, generation)
        .map(|suggestion| suggestion.text)
        .map_err(StepError::Provider)
}

fn run_chunked(
    query: &Incident,
    chunk_index: &IndexKind,
    chunks_by_id: &BTreeMap<String, Chunk>,
    providers: &ExperimentProviders<'_>,
    budget: &TokenBudget,
    generation: &GenerationConfig,
    m: usize,
) -> Result<String, StepError> {
    let chunks = retrieve_chunks(chunk_index, chunks_by_id, providers.embedder, query, m)?;
    let prompt = assemble_chunked_prompt(&chunks, query, budget)?;
    generate_root_cause(providers.generator, &prompt, generation)
        .map(|suggestion| suggestion.text)
        .map_err(StepError::Provider)
}

fn build_chunk_index(
    splits: &CorpusSplits,
    chunk_tokens: usize,
    counter: &TokenCounter,
    embedder: &dyn Embedder,
) -> Result<(IndexKind, BTreeMap<String, Chunk>), ExperimentError> {
    let chunks = chunk_corpus(&splits.retrieval, chunk_tokens, counter)?;
    let mut pairs = Vec::with_capacity(chunks.len());
    for chunk in &chunks {
        pairs.push((chunk.chunk_id.clone(), embedder.embed(&chunk.text)?));
    }
    let index = IndexKind::Flat(build_flat_index(&pairs)?);
    let by_id = chunks
        .into_iter()
        .map(|chunk| (chunk.chunk_id.clone(), chunk))
        .collect();
    Ok((index, by_id))
}

/// Embed the retrieval split (title + short summary) and build a flat index
/// over it. The standard way to prepare `run_experiment`'s index argument.
pub fn build_retrieval_index(
    retrieval: &[Incident],
    embedder: &dyn Embedder,
) -> Result<IndexKind, ExperimentError> {
    let mut pairs = Vec::with_capacity(retrieval.len());
    for incident in retrieval {
        let text = crate::embed::build_query_text(incident)?;
        pairs.push((incident.id.clone(), embedder.embed(&text)?));
    }
    Ok(IndexKind::Flat(build_flat_index(&pairs)?))
}

impl RunResult {
    pub fn row(&self, label: &str) -> Result<&RunRow, ExperimentError> {
        self.rows
            .iter()
            .find(|row| row.label == label)
            .ok_or_else(|| ExperimentError::UnknownRow(label.to_string()))
    }

    /// Mean of one metric for one row.
    pub fn mean(&self, label: &str, metric: &str) -> Result<f64, ExperimentError> {
        self.row(label)?
            .means
            .get(metric)
            .copied()
            .ok_or_else(|| ExperimentError::MissingMetric(metric.to_string()))
    }

    /// Population standard deviation of one metric's mean across all rows.
    /// This is the spread the ordering study reports.
    pub fn mean_stddev_across_rows(&self, metric: &str) -> Result<f64, ExperimentError> {
        let means: Vec<f64> = self
            .rows
            .iter()
            .map(|row| {
                row.means
                    .get(metric)
                    .copied()
                    .ok_or_else(|| ExperimentError::MissingMetric(metric.to_string()))
            })
            .collect::<Result<_, _>>()?;
        let n = means.len() as f64;
        let mu = means.iter().sum::<f64>() / n;
        let var = means.iter().map(|m| (m - mu) * (m - mu)).sum::<f64>() / n;
        Ok(libm::sqrt(var))
    }
}

/// Paired significance test between two rows on one metric, over the
/// incidents both rows scored (failed incidents drop out pairwise).
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub enum SignificanceMethod {
    Wilcoxon,
    PairedBootstrap { iterations: usize, seed: u64 },
}

pub fn significance(
    result: &RunResult,
    label_a: &str,
    label_b: &str,
    metric: &str,
    method: SignificanceMethod,
) -> Result<f64, ExperimentError> {
    let row_a = result.row(label_a)?;
    let row_b = result.row(label_b)?;
    let scores_b: BTreeMap<&str, f64> = row_b
        .per_pair
        .iter()
        .filter_map(|pair| {
            pair.scores
                .get(metric)
                .map(|score| (pair.incident_id.as_str(), *score))
        })
        .collect();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for pair in &row_a.per_pair {
        if let (Some(a), Some(b)) = (pair.scores.get(metric), scores_b.get(pair.incident_id.as_str()))
        {
            xs.push(*a);
            ys.push(*b);
        }
    }
    if xs.is_empty() {
        return Err(ExperimentError::NoSharedIncidents);
    }
    let p = match method {
        SignificanceMethod::Wilcoxon => wilcoxon_signed_rank(&xs, &ys)?,
        SignificanceMethod::PairedBootstrap { iterations, seed } => {
            paired_bootstrap(&xs, &ys, iterations, seed)?
        }
    };
    Ok(p)
}

/// Render the report table: one condition per line, the four native metric
/// columns, and BERTScore / Nubia columns that stay blank unless external
/// scorers filled them.
pub fn render_csv(result: &RunResult) -> String {
    let mut out = String::from("condition,ROUGE-L,ROUGE-1,METEOR,GLEU,BERTScore,Nubia\n");
    for row in &result.rows {
        out.push_str(&row.label);
        for metric in ["ROUGE-L", "ROUGE-1", "METEOR", "GLEU", "BERTScore", "Nubia"] {
            out.push(',');
            if let Some(value) = row.means.get(metric) {
                out.push_str(&format_2dp(*value));
            }
        }
        out.push('\n');
    }
    out
}

fn format_2dp(value: f64) -> String {
    alloc::format!("{value:.2}")
}
