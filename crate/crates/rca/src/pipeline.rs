//! The end-to-end request path shared by the CLI and the HTTP service:
//! clean, summarize the query, retrieve, order, assemble, generate. Both
//! surfaces call [`run_rca`], so identical inputs and configuration produce
//! identical suggestions.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use rca_core::cleanse::clean_incident;
use rca_core::embed::Embedder;
use rca_core::generate::{generate_root_cause, GenerateError, GenerationConfig, RootCauseSuggestion};
use rca_core::incident::Incident;
use rca_core::index::IndexKind;
use rca_core::prompt::{
    assemble_rca_prompt, order_examples, AssembledPrompt, OrderingMode, PromptError, TokenBudget,
};
use rca_core::provider::CompletionProvider;
use rca_core::retrieve::{retrieve_examples, InContextExample, RetrieveError, SelectionMode};
use rca_core::summarize::{summarize_field, summarize_incident, SummarizeError, SummaryCache, SummaryKind};

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    Summarize(#[from] SummarizeError),
    #[error(transparent)]
    Retrieve(#[from] RetrieveError),
    #[error(transparent)]
    Prompt(#[from] PromptError),
    #[error(transparent)]
    Generate(#[from] GenerateError),
}

/// Selection and arrangement knobs for one RCA request.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RcaParams {
    pub k: usize,
    pub mode: SelectionMode,
    pub ordering: OrderingMode,
    pub seed: u64,
}

/// Everything a caller may want to audit about one suggestion.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct RcaOutcome {
    pub suggestion: RootCauseSuggestion,
    pub examples: Vec<InContextExample>,
    pub prompt: AssembledPrompt,
}

/// Prepare an inbound incident for querying: clean it and summarize the
/// summary field. The root cause is left alone (new incidents usually have
/// none).
pub fn prepare_query(
    incident: &Incident,
    summarizer: &dyn CompletionProvider,
    cache: &dyn SummaryCache,
) -> Result<Incident, SummarizeError> {
    if incident.summary_short.is_some() {
        return Ok(incident.clone());
    }
    let mut cleaned = if incident.summary_clean.is_some() {
        incident.clone()
    } else {
        clean_incident(incident).0
    };
    let summary_clean = cleaned.summary_clean.clone().unwrap_or_default();
    let short = summarize_field(summarizer, cache, SummaryKind::IncidentSummary, &summary_clean)?;
    cleaned.summary_short = Some(short);
    Ok(cleaned)
}

/// Run the full retrieval-augmented generation path for one incident.
#[allow(clippy::too_many_arguments)]
pub fn run_rca(
    incident: &Incident,
    corpus: &BTreeMap<String, Incident>,
    index: &IndexKind,
    embedder: &dyn Embedder,
    summarizer: &dyn CompletionProvider,
    generator: &dyn CompletionProvider,
    cache: &dyn SummaryCache,
    budget: &TokenBudget,
    params: &RcaParams,
) -> Result<RcaOutcome, PipelineError> {
    let query = prepare_query(incident, summarizer, cache)?;
    let candidates = retrieve_examples(
        index,
        embedder,
        corpus,
        &query,
        params.k,
        params.mode,
        params.seed,
    )?;
    let ordered = order_examples(&candidates, params.ordering);
    let prompt = assemble_rca_prompt(&ordered, &query, budget)?;
    let generation = GenerationConfig {
        model_id: generator.id().to_string(),
        ..GenerationConfig::default()
    };
    let suggestion = generate_root_cause(generator, &prompt, &generation)?;
    let examples = ordered
        .into_iter()
        .filter(|e| prompt.examples_used.contains(&e.incident_id))
        .collect();
    Ok(RcaOutcome {
        suggestion,
        examples,
        prompt,
    })
}

/// Clean and summarize a batch of incidents with up to `concurrency`
/// provider calls in flight. Output order matches input order; the first
/// error aborts the batch.
pub fn summarize_batch(
    summarizer: &dyn CompletionProvider,
    cache: &(dyn SummaryCache + Sync),
    incidents: &[Incident],
    concurrency: usize,
) -> Result<Vec<Incident>, SummarizeError> {
    let workers = concurrency.clamp(1, incidents.len().max(1));
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<Incident>>> = Mutex::new(vec![None; incidents.len()]);
    let failure: Mutex<Option<SummarizeError>> = Mutex::new(None);
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= incidents.len() {
                    return;
                }
                if failure.lock().expect("failure lock").is_some() {
                    return;
                }
                let incident = &incidents[i];
                let prepared = if incident.summary_clean.is_some()
                    && incident.root_cause_clean.is_some()
                {
                    incident.clone()
                } else {
                    clean_incident(incident).0
                };
                match summarize_incident(summarizer, cache, &prepared) {
                    Ok(summarized) => {
                        results.lock().expect("results lock")[i] = Some(summarized);
                    }
                    Err(error) => {
                        failure.lock().expect("failure lock").get_or_insert(error);
                        return;
                    }
                }
            });
        }
    });
    if let Some(error) = failure.into_inner().expect("failure lock") {
        return Err(error);
    }
    Ok(results
        .into_inner()
        .expect("results lock")
        .into_iter()
        .map(|slot| slot.expect("every slot filled"))
        .collect())
}
