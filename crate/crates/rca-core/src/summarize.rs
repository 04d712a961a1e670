//! Provider-backed summarization of incident summaries and root causes.
//!
//! Long tickets are condensed to a few sentences before they are embedded or
//! inserted into prompts. The two prompt templates are byte-stable; results
//! are cached under a content hash of (kind, provider, template version,
//! input), so re-runs never re-call the provider for text it has seen.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use core::cell::RefCell;
use core::sync::atomic::{AtomicUsize, Ordering};

use sha2::{Digest, Sha256};

use crate::incident::Incident;
use crate::provider::{CompletionProvider, CompletionRequest, ProviderError};

/// Which field a summary condenses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SummaryKind {
    IncidentSummary,
    RootCause,
}

/// Sentinel the summarization prompt asks the model to finish with; stripped
/// from completions before caching.
pub const END_OF_TEXT: &str = "<|endoftext|>";

/// Bumped whenever a template changes, so stale cache entries miss.
pub const TEMPLATE_VERSION: &str = "v1";

/// Completion allowance for summarization calls (a few sentences).
pub const SUMMARY_MAX_TOKENS: u32 = 256;

const INCIDENT_SUMMARY_TEMPLATE: &str = "I want you to act as an expert software engineer. Consider the following incident report was submitted on the IcM portal.

Incident Description: {description}

Your task is to summarize this incident report. Focus on the following aspects of the incident:

- The symptoms of the incident that lead to this incident report
- References to external services or tools that contain relevant information.
- Distinguishing features of the incident such as precise error codes, specifics from logs etc.
- Context of the incident such as the name of the service, region, etc.

Your summary should be at most 5-6 sentences and should be in third person. You must end your summary with <|endoftext|>.

Concise Summary:";

const ROOT_CAUSE_TEMPLATE: &str = "I want you to act as an expert software engineer.
Your task is to summarize the following root cause of an incident report. Your summary must clearly state what the root cause of the incident was.

Incident Root Cause:
{description}

Concise Summary:";

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum SummarizeError {
    #[error("cannot summarize an empty description")]
    EmptyDescription,
    #[error("incident {0} has no cleaned fields; clean before summarizing")]
    MissingCleanFields(String),
    #[error(transparent)]
    Provider(#[from] ProviderError),
}

/// The verbatim summarization prompt for `kind` with `{description}` filled.
pub fn build_summarization_prompt(
    kind: SummaryKind,
    description: &str,
) -> Result<String, SummarizeError> {
    if description.is_empty() {
        return Err(SummarizeError::EmptyDescription);
    }
    let template = match kind {
        SummaryKind::IncidentSummary => INCIDENT_SUMMARY_TEMPLATE,
        SummaryKind::RootCause => ROOT_CAUSE_TEMPLATE,
    };
    Ok(template.replace("{description}", description))
}

/// One line of the cache file: content key, kind, summary text.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SummaryCacheEntry {
    pub key: String,
    pub kind: SummaryKind,
    pub value: String,
}

/// Content-addressed summary store. Within a run, the value returned for a
/// key never changes; lookups never mutate entries.
pub trait SummaryCache {
    fn get(&self, key: &str) -> Option<String>;
    fn put(&self, key: &str, kind: SummaryKind, value: &str);
}

/// Plain in-memory cache (single-threaded; the companion crate provides the
/// file-backed, lock-guarded variant).
#[derive(Debug, Default)]
pub struct MemoryCache {
    entries: RefCell<BTreeMap<String, String>>,
}

impl MemoryCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.borrow().len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.borrow().is_empty()
    }
}

impl SummaryCache for MemoryCache {
    fn get(&self, key: &str) -> Option<String> {
        self.entries.borrow().get(key).cloned()
    }

    fn put(&self, key: &str, _kind: SummaryKind, value: &str) {
        self.entries
            .borrow_mut()
            .entry(key.to_string())
            .or_insert_with(|| value.to_string());
    }
}

/// SHA-256 over (kind, provider id, template version, input text).
pub fn cache_key(kind: SummaryKind, provider_id: &str, input: &str) -> String {
    let mut hasher = Sha256::new();
    let tag: u8 = match kind {
        SummaryKind::IncidentSummary => 0,
        SummaryKind::RootCause => 1,
    };
    hasher.update([tag, 0x1f]);
    hasher.update(provider_id.as_bytes());
    hasher.update([0x1f]);
    hasher.update(TEMPLATE_VERSION.as_bytes());
    hasher.update([0x1f]);
    hasher.update(input.as_bytes());
    hex::encode(hasher.finalize())
}

fn strip_end_of_text(completion: &str) -> &str {
    let trimmed = completion.trim();
    trimmed
        .strip_suffix(END_OF_TEXT)
        .map(str::trim_end)
        .unwrap_or(trimmed)
}

/// Summarize one field through the provider, with caching. Repeat calls for
/// the same (kind, provider, input) are cache hits and never reach the
/// provider.
pub fn summarize_field(
    provider: &dyn CompletionProvider,
    cache: &dyn SummaryCache,
    kind: SummaryKind,
    text: &str,
) -> Result<String, SummarizeError> {
    if text.is_empty() {
        return Err(SummarizeError::EmptyDescription);
    }
    let key = cache_key(kind, provider.id(), text);
    if let Some(hit) = cache.get(&key) {
        return Ok(hit);
    }
    let prompt = build_summarization_prompt(kind, text)?;
    let completion = provider.complete(&CompletionRequest {
        prompt: &prompt,
        temperature: 0.0,
        max_tokens: SUMMARY_MAX_TOKENS,
        model_id: provider.id(),
    })?;
    let summary = strip_end_of_text(&completion);
    if summary.is_empty() {
        return Err(SummarizeError::Provider(ProviderError::EmptyCompletion));
    }
    cache.put(&key, kind, summary);
    Ok(summary.to_string())
}

/// Populate `summary_short` / `root_cause_short` from the cleaned fields.
pub fn summarize_incident(
    provider: &dyn CompletionProvider,
    cache: &dyn SummaryCache,
    incident: &Incident,
) -> Result<Incident, SummarizeError> {
    let (Some(summary_clean), Some(root_cause_clean)) =
        (&incident.summary_clean, &incident.root_cause_clean)
    else {
        return Err(SummarizeError::MissingCleanFields(incident.id.clone()));
    };
    let summary_short =
        summarize_field(provider, cache, SummaryKind::IncidentSummary, summary_clean)?;
    let root_cause_short =
        summarize_field(provider, cache, SummaryKind::RootCause, root_cause_clean)?;
    let mut summarized = incident.clone();
    summarized.summary_short = Some(summary_short);
    summarized.root_cause_short = Some(root_cause_short);
    Ok(summarized)
}

/// Deterministic offline summarizer: extracts the description back out of
/// the prompt and returns its first `sentences` sentences, terminated with
/// the end-of-text sentinel like a well-behaved remote model.
#[derive(Debug)]
pub struct ExtractiveSummaryProvider {
    sentences: usize,
    id: String,
    calls: AtomicUsize,
}

impl Default for ExtractiveSummaryProvider {
    fn default() -> Self {
        Self::new(2)
    }
}

impl ExtractiveSummaryProvider {
    pub fn new(sentences: usize) -> Self {
        ExtractiveSummaryProvider {
            sentences: sentences.max(1),
            id: alloc::format!("extractive-{}", sentences.max(1)),
            calls: AtomicUsize::new(0),
        }
    }

    /// Number of completions served; cache hits do not increment this.
    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::Relaxed)
    }

    fn description_of(prompt: &str) -> Result<&str, ProviderError> {
        if let Some(start) = prompt.find("Incident Description: ") {
            let rest = &prompt[start + "Incident Description: ".len()..];
            let end = rest
                .find("\n\nYour task is to summarize")
                .ok_or_else(|| ProviderError::Protocol("unterminated description".into()))?;
            return Ok(&rest[..end]);
        }
        if let Some(start) = prompt.find("Incident Root Cause:\n") {
            let rest = &prompt[start + "Incident Root Cause:\n".len()..];
            let end = rest
                .find("\n\nConcise Summary:")
                .ok_or_else(|| ProviderError::Protocol("unterminated root cause".into()))?;
            return Ok(&rest[..end]);
        }
        Err(ProviderError::Protocol(
            "not a summarization prompt".into(),
        ))
    }

    fn leading_sentences(text: &str, n: usize) -> &str {
        let mut seen = 0;
        let mut chars = text.char_indices().peekable();
        while let Some((pos, c)) = chars.next() {
            if matches!(c, '.' | '!' | '?') {
                let at_boundary = chars
                    .peek()
                    .map(|(_, next)| next.is_whitespace())
                    .unwrap_or(true);
                if at_boundary {
                    seen += 1;
                    if seen == n {
                        return &text[..pos + c.len_utf8()];
                    }
                }
            }
        }
        text
    }
}

impl CompletionProvider for ExtractiveSummaryProvider {
    fn id(&self) -> &str {
        &self.id
    }

    fn complete(&self, request: &CompletionRequest<'_>) -> Result<String, ProviderError> {
        self.calls.fetch_add(1, Ordering::Relaxed);
        let description = Self::description_of(request.prompt)?;
        let summary = Self::leading_sentences(description.trim(), self.sentences);
        Ok(alloc::format!("{}{}", summary.trim(), END_OF_TEXT))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;

    #[test]
    fn summary_prompt_matches_template() {
        let prompt =
            build_summarization_prompt(SummaryKind::IncidentSummary, "Disk full on node 7.")
                .unwrap();
        assert!(prompt.starts_with("I want you to act as an expert software engineer."));
        assert!(prompt.contains("Incident Description: Disk full on node 7."));
        assert!(prompt.contains("- The symptoms of the incident"));
        assert!(prompt.contains("References to external services"));
        assert!(prompt.contains("Distinguishing features of the incident"));
        assert!(prompt.contains("Context of the incident"));
        assert!(prompt.contains("at most 5-6 sentences"));
        assert!(prompt.contains(END_OF_TEXT));
        assert!(prompt.ends_with("Concise Summary:"));
    }

    #[test]
    fn root_cause_prompt_matches_template() {
        let prompt = build_summarization_prompt(SummaryKind::RootCause, "Bad config push.").unwrap();
        assert!(prompt.starts_with("I want you to act as an expert software engineer.\n"));
        assert!(prompt.contains("Incident Root Cause:\nBad config push."));
        assert!(prompt.contains("must clearly state what the root cause of the incident was"));
        assert!(prompt.ends_with("Concise Summary:"));
    }

    #[test]
    fn templates_are_byte_stable() {
        // Golden snapshots: any template edit must bump TEMPLATE_VERSION.
        let prompt = build_summarization_prompt(SummaryKind::RootCause, "X").unwrap();
        assert_eq!(
            prompt,
            "I want you to act as an expert software engineer.\nYour task is to summarize the following root cause of an incident report. Your summary must clearly state what the root cause of the incident was.\n\nIncident Root Cause:\nX\n\nConcise Summary:"
        );
    }

    #[test]
    fn empty_description_is_rejected() {
        assert_eq!(
            build_summarization_prompt(SummaryKind::IncidentSummary, ""),
            Err(SummarizeError::EmptyDescription)
        );
    }

    #[test]
    fn extractive_provider_returns_first_two_sentences() {
        let provider = ExtractiveSummaryProvider::new(2);
        let cache = MemoryCache::new();
        let text = "One went down. Two is slow. Three recovered. Four paged. Five resolved.";
        let summary =
            summarize_field(&provider, &cache, SummaryKind::IncidentSummary, text).unwrap();
        assert_eq!(summary, "One went down. Two is slow.");
    }

    #[test]
    fn short_text_passes_through_whole() {
        let provider = ExtractiveSummaryProvider::new(2);
        let cache = MemoryCache::new();
        let summary =
            summarize_field(&provider, &cache, SummaryKind::RootCause, "Single sentence").unwrap();
        assert_eq!(summary, "Single sentence");
    }

    #[test]
    fn repeat_calls_hit_the_cache() {
        let provider = ExtractiveSummaryProvider::new(2);
        let cache = MemoryCache::new();
        let text = "Alpha failed. Beta failed. Gamma fine.";
        let first = summarize_field(&provider, &cache, SummaryKind::IncidentSummary, text).unwrap();
        let second =
            summarize_field(&provider, &cache, SummaryKind::IncidentSummary, text).unwrap();
        assert_eq!(first, second);
        assert_eq!(provider.calls(), 1);
    }

    #[test]
    fn cache_keys_separate_kinds_and_providers() {
        let a = cache_key(SummaryKind::IncidentSummary, "p1", "text");
        let b = cache_key(SummaryKind::RootCause, "p1", "text");
        let c = cache_key(SummaryKind::IncidentSummary, "p2", "text");
        assert_ne!(a, b);
        assert_ne!(a, c);
        assert_eq!(a.len(), 64);
    }

    struct EmptyProvider;
    impl CompletionProvider for EmptyProvider {
        fn id(&self) -> &str {
            "empty"
        }
        fn complete(&self, _request: &CompletionRequest<'_>) -> Result<String, ProviderError> {
            Ok(String::new())
        }
    }

    #[test]
    fn empty_completion_is_an_error() {
        let cache = MemoryCache::new();
        assert_eq!(
            summarize_field(&EmptyProvider, &cache, SummaryKind::RootCause, "text"),
            Err(SummarizeError::Provider(ProviderError::EmptyCompletion))
        );
    }

    #[test]
    fn sentinel_only_completion_is_an_error() {
        struct SentinelOnly;
        impl CompletionProvider for SentinelOnly {
            fn id(&self) -> &str {
                "sentinel"
            }
            fn complete(&self, _r: &CompletionRequest<'_>) -> Result<String, ProviderError> {
                Ok(END_OF_TEXT.into())
            }
        }
        let cache = MemoryCache::new();
        assert!(summarize_field(&SentinelOnly, &cache, SummaryKind::RootCause, "text").is_err());
    }

    #[test]
    fn summarize_incident_requires_clean_fields() {
        let incident = crate::incident::testutil::sample("I1", 1);
        let provider = ExtractiveSummaryProvider::new(2);
        let cache = MemoryCache::new();
        assert_eq!(
            summarize_incident(&provider, &cache, &incident),
            Err(SummarizeError::MissingCleanFields("I1".into()))
        );
    }

    #[test]
    fn summarize_incident_fills_short_fields_only() {
        let (incident, _) = crate::cleanse::clean_incident(&crate::incident::testutil::sample("I1", 1));
        let provider = ExtractiveSummaryProvider::new(2);
        let cache = MemoryCache::new();
        let summarized = summarize_incident(&provider, &cache, &incident).unwrap();
        assert!(summarized.summary_short.is_some());
        assert!(summarized.root_cause_short.is_some());
        assert_eq!(summarized.summary_raw, incident.summary_raw);
        assert_eq!(summarized.summary_clean, incident.summary_clean);
    }

    #[test]
    fn cache_value_is_stable_within_a_run() {
        // A provider whose output changes per call must not leak through the
        // cache: the first stored value wins for a given key.
        struct Drifting(AtomicUsize);
        impl CompletionProvider for Drifting {
            fn id(&self) -> &str {
                "drifting"
            }
            fn complete(&self, _r: &CompletionRequest<'_>) -> Result<String, ProviderError> {
                let n = self.0.fetch_add(1, Ordering::Relaxed);
                Ok(alloc::format!("completion number {n}"))
            }
        }
        let provider = Drifting(AtomicUsize::new(0));
        let cache = MemoryCache::new();
        let results: Vec<String> = (0..3)
            .map(|_| {
                summarize_field(&provider, &cache, SummaryKind::RootCause, "same input").unwrap()
            })
            .collect();
        assert!(results.iter().all(|r| r == "completion number 0"));
    }

    #[test]
    fn cache_entry_round_trips_as_json() {
        let entry = SummaryCacheEntry {
            key: "abc".into(),
            kind: SummaryKind::RootCause,
            value: "short".into(),
        };
        let line = serde_json::to_string(&entry).unwrap();
        assert!(line.contains("root_cause"));
        let back: SummaryCacheEntry = serde_json::from_str(&line).unwrap();
        assert_eq!(back, entry);
    }
}
