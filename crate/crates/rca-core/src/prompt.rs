//! Few-shot prompt assembly under a token budget.
//!
//! The root-cause prompt is a task line, a sequence of historical-incident
//! example blocks separated by blank lines, and the new incident ending in
//! `Root Cause:` so the model continues from there. The new incident keeps
//! its original (unsummarized) summary; examples use summarized fields.
//!
//! Budgets are enforced at assembly time: `token_count` of the final text
//! never exceeds `prompt_limit − completion_reserve`. When a fixed example
//! list overflows, the lowest-relevance examples are dropped first,
//! whatever their display position; full-prompt mode instead fills greedily
//! in relevance order until the next example would overflow.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;

use crate::incident::Incident;
use crate::randutil::shuffle;
use crate::retrieve::{Chunk, InContextExample};

/// Prompt-size presets.
pub const PROMPT_LIMIT_8K: usize = 8192;
pub const PROMPT_LIMIT_32K: usize = 32768;
/// Tokens held back for the completion.
pub const DEFAULT_COMPLETION_RESERVE: usize = 200;

const TASK_SENTENCE: &str =
    "I want you to act as a software engineer to figure out the root cause of incidents.";
const TASK_SENTENCE_WITH_EXAMPLES: &str =
    "I want you to act as a software engineer to figure out the root cause of incidents. I will provide some examples to start with.";

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum PromptError {
    #[error("completion reserve {reserve} must be smaller than prompt limit {limit}")]
    InvalidBudget { limit: usize, reserve: usize },
    #[error("unknown token counter id {0:?}")]
    UnknownCounterId(String),
    #[error("chars-per-token requires a positive divisor")]
    ZeroCharsPerToken,
    #[error("new-incident block needs {token_count} tokens but only {available} are available")]
    NewIncidentTooLarge { token_count: usize, available: usize },
}

/// Per-word token weights supplied by an external (provider-exact) table.
/// Unknown words fall back to `max(1, ceil(chars/4))`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExternalTokenTable {
    pub per_word: BTreeMap<String, u32>,
}

impl ExternalTokenTable {
    fn weight(&self, word: &str) -> usize {
        match self.per_word.get(word) {
            Some(&w) => w.max(1) as usize,
            None => {
                let chars = word.chars().count();
                1.max(chars.div_ceil(4))
            }
        }
    }
}

/// Deterministic token counters. `Whitespace` is the offline default;
/// `CharsPerToken` approximates subword tokenizers; `ExternalTable` plugs in
/// provider-measured per-word counts for exact budgeting.
#[derive(Debug, Clone, PartialEq)]
pub enum TokenCounter {
    Whitespace,
    CharsPerToken(u32),
    ExternalTable(ExternalTokenTable),
}

impl TokenCounter {
    /// Resolve a counter id: `whitespace` or `chars:<n>`.
    pub fn from_id(id: &str) -> Result<TokenCounter, PromptError> {
        if id == "whitespace" {
            return Ok(TokenCounter::Whitespace);
        }
        if let Some(n) = id.strip_prefix("chars:") {
            let parsed: u32 = n
                .parse()
                .map_err(|_| PromptError::UnknownCounterId(id.to_string()))?;
            if parsed == 0 {
                return Err(PromptError::ZeroCharsPerToken);
            }
            return Ok(TokenCounter::CharsPerToken(parsed));
        }
        Err(PromptError::UnknownCounterId(id.to_string()))
    }

    pub fn count(&self, text: &str) -> usize {
        match self {
            TokenCounter::Whitespace => text.split_whitespace().count(),
            TokenCounter::CharsPerToken(c) => {
                text.chars().count().div_ceil(*c as usize)
            }
            TokenCounter::ExternalTable(table) => {
                text.split_whitespace().map(|w| table.weight(w)).sum()
            }
        }
    }

    /// Byte offsets where each counted token begins, with per-token weights.
    /// Cutting text at these offsets is lossless and token-aligned, which is
    /// what corpus chunking relies on.
    pub(crate) fn token_spans(&self, text: &str) -> Vec<(usize, usize)> {
        match self {
            TokenCounter::Whitespace => word_spans(text).map(|(start, _)| (start, 1)).collect(),
            TokenCounter::CharsPerToken(c) => text
                .char_indices()
                .step_by(*c as usize)
                .map(|(start, _)| (start, 1))
                .collect(),
            TokenCounter::ExternalTable(table) => word_spans(text)
                .map(|(start, word)| (start, table.weight(word)))
                .collect(),
        }
    }
}

fn word_spans(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.split_whitespace()
        .map(move |word| (word.as_ptr() as usize - text.as_ptr() as usize, word))
}

/// Count tokens under `counter`.
pub fn count_tokens(counter: &TokenCounter, text: &str) -> usize {
    counter.count(text)
}

/// Prompt-size budget: hard token limit minus a completion reserve.
#[derive(Debug, Clone, PartialEq)]
pub struct TokenBudget {
    pub prompt_limit: usize,
    pub completion_reserve: usize,
    pub counter: TokenCounter,
}

impl TokenBudget {
    pub fn new(
        prompt_limit: usize,
        completion_reserve: usize,
        counter: TokenCounter,
    ) -> Result<TokenBudget, PromptError> {
        if completion_reserve >= prompt_limit {
            return Err(PromptError::InvalidBudget {
                limit: prompt_limit,
                reserve: completion_reserve,
            });
        }
        Ok(TokenBudget {
            prompt_limit,
            completion_reserve,
            counter,
        })
    }

    /// Tokens available for the prompt itself.
    pub fn available(&self) -> usize {
        self.prompt_limit - self.completion_reserve
    }

    fn fits(&self, text: &str) -> bool {
        self.counter.count(text) <= self.available()
    }
}

/// Display arrangement of the selected examples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrderingMode {
    /// Most relevant example first, nearest the task description.
    DescendingRelevance,
    /// Exact reverse: most relevant example nearest the new incident.
    AscendingRelevance,
    /// Seeded Fisher-Yates permutation of the descending arrangement.
    ShuffledSeeded(u64),
}

/// Arrange examples for display. Ties in relevance break by id ascending,
/// and ascending is defined as the exact reverse of descending.
pub fn order_examples(examples: &[InContextExample], mode: OrderingMode) -> Vec<InContextExample> {
    let mut ordered = examples.to_vec();
    ordered.sort_by(|a, b| {
        b.relevance
            .total_cmp(&a.relevance)
            .then_with(|| a.incident_id.cmp(&b.incident_id))
    });
    match mode {
        OrderingMode::DescendingRelevance => {}
        OrderingMode::AscendingRelevance => ordered.reverse(),
        OrderingMode::ShuffledSeeded(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            shuffle(&mut rng, &mut ordered);
        }
    }
    ordered
}

/// How a candidate list is fitted to the budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitMode {
    /// Keep the given list, dropping lowest-relevance examples on overflow.
    FixedK,
    /// Fill greedily in relevance order until the next example overflows.
    FullPrompt,
}

/// Result of budget fitting: the surviving examples (display order
/// preserved for `FixedK`, relevance order for `FullPrompt`) and how many
/// candidates were dropped.
#[derive(Debug, Clone, PartialEq)]
pub struct FitOutcome {
    pub kept: Vec<InContextExample>,
    pub dropped: usize,
}

/// Fit `examples` to the budget for `incident`'s prompt. Never errors: an
/// overflowing zero-example prompt simply returns an empty `kept`.
pub fn fit_to_budget(
    examples: &[InContextExample],
    incident: &Incident,
    budget: &TokenBudget,
    mode: FitMode,
) -> FitOutcome {
    let kept = match mode {
        FitMode::FixedK => {
            let mut kept: Vec<InContextExample> = examples.to_vec();
            while !kept.is_empty() && !budget.fits(&rca_prompt_text(&kept, incident)) {
                let victim = kept
                    .iter()
                    .enumerate()
                    .min_by(|(ia, a), (ib, b)| {
                        a.relevance.total_cmp(&b.relevance).then_with(|| ib.cmp(ia))
                    })
                    .map(|(i, _)| i)
                    .expect("kept is non-empty");
                kept.remove(victim);
            }
            kept
        }
        FitMode::FullPrompt => {
            let mut by_relevance = examples.to_vec();
            by_relevance.sort_by(|a, b| {
                b.relevance
                    .total_cmp(&a.relevance)
                    .then_with(|| a.incident_id.cmp(&b.incident_id))
            });
            let mut kept: Vec<InContextExample> = Vec::new();
            for candidate in by_relevance {
                kept.push(candidate);
                if !budget.fits(&rca_prompt_text(&kept, incident)) {
                    kept.pop();
                    break;
                }
            }
            kept
        }
    };
    FitOutcome {
        dropped: examples.len() - kept.len(),
        kept,
    }
}

/// An assembled prompt plus its audit trail. `token_count` is measured with
/// the budget's counter and satisfies the budget invariant; `truncated`
/// means at least one candidate example or chunk was dropped to fit.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct AssembledPrompt {
    pub text: String,
    pub examples_used: Vec<String>,
    pub token_count: usize,
    pub truncated: bool,
}

fn example_block(example: &InContextExample) -> String {
    alloc::format!(
        "Title: {}\nSummary: {}\nRoot Cause: {}",
        example.title,
        example.summary_short,
        example.root_cause_short
    )
}

fn new_incident_block(incident: &Incident) -> String {
    alloc::format!(
        "Title: {}\nSummary: {}\nRoot Cause:",
        incident.title,
        incident.summary_raw
    )
}

fn rca_prompt_text(examples: &[InContextExample], incident: &Incident) -> String {
    let mut parts: Vec<String> = Vec::with_capacity(examples.len() + 2);
    parts.push(
        if examples.is_empty() {
            TASK_SENTENCE
        } else {
            TASK_SENTENCE_WITH_EXAMPLES
        }
        .to_string(),
    );
    parts.extend(examples.iter().map(example_block));
    parts.push(new_incident_block(incident));
    parts.join("\n\n")
}

fn chunked_prompt_text(chunks: &[Chunk], incident: &Incident) -> String {
    let mut parts: Vec<String> = Vec::with_capacity(chunks.len() + 2);
    parts.push(
        if chunks.is_empty() {
            TASK_SENTENCE
        } else {
            TASK_SENTENCE_WITH_EXAMPLES
        }
        .to_string(),
    );
    parts.extend(chunks.iter().map(|c| c.text.clone()));
    parts.push(new_incident_block(incident));
    parts.join("\n\n")
}

/// Assemble the few-shot prompt. `examples` should already be in display
/// order; on overflow, lowest-relevance examples are dropped (not trailing
/// ones) and `truncated` is set. Errors only when the zero-example prompt
/// itself cannot fit.
pub fn assemble_rca_prompt(
    examples: &[InContextExample],
    incident: &Incident,
    budget: &TokenBudget,
) -> Result<AssembledPrompt, PromptError> {
    let fit = fit_to_budget(examples, incident, budget, FitMode::FixedK);
    let text = rca_prompt_text(&fit.kept, incident);
    let token_count = budget.counter.count(&text);
    if token_count > budget.available() {
        return Err(PromptError::NewIncidentTooLarge {
            token_count,
            available: budget.available(),
        });
    }
    Ok(AssembledPrompt {
        examples_used: fit.kept.iter().map(|e| e.incident_id.clone()).collect(),
        token_count,
        truncated: fit.dropped > 0,
        text,
    })
}

/// Assemble the chunked-baseline prompt: plain reference passages instead of
/// structured examples. Overflow drops trailing chunks first.
pub fn assemble_chunked_prompt(
    chunks: &[Chunk],
    incident: &Incident,
    budget: &TokenBudget,
) -> Result<AssembledPrompt, PromptError> {
    let mut kept: Vec<Chunk> = chunks.to_vec();
    while !kept.is_empty() && !budget.fits(&chunked_prompt_text(&kept, incident)) {
        kept.pop();
    }
    let text = chunked_prompt_text(&kept, incident);
    let token_count = budget.counter.count(&text);
    if token_count > budget.available() {
        return Err(PromptError::NewIncidentTooLarge {
            token_count,
            available: budget.available(),
        });
    }
    Ok(AssembledPrompt {
        examples_used: kept.iter().map(|c| c.chunk_id.clone()).collect(),
        token_count,
        truncated: kept.len() < chunks.len(),
        text,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example(id: &str, relevance: f64, words: usize) -> InContextExample {
        let filler: Vec<String> = (0..words).map(|i| alloc::format!("w{i}")).collect();
        InContextExample {
            incident_id: id.to_string(),
            title: alloc::format!("Example {id}"),
            summary_short: filler.join(" "),
            root_cause_short: alloc::format!("Cause {id}."),
            relevance,
        }
    }

    fn incident() -> Incident {
        let mut incident = crate::incident::testutil::sample("NEW", 9);
        incident.title = "T".to_string();
        incident.summary_raw = "S".to_string();
        incident
    }

    fn budget(limit: usize) -> TokenBudget {
        TokenBudget::new(limit, DEFAULT_COMPLETION_RESERVE, TokenCounter::Whitespace).unwrap()
    }

    #[test]
    fn whitespace_counter_counts_runs() {
        assert_eq!(TokenCounter::Whitespace.count("a b  c"), 3);
        assert_eq!(TokenCounter::Whitespace.count(""), 0);
    }

    #[test]
    fn chars_per_token_rounds_up() {
        let counter = TokenCounter::CharsPerToken(4);
        assert_eq!(counter.count("abcdefgh"), 2);
        assert_eq!(counter.count("abcdefghi"), 3);
        assert_eq!(counter.count(""), 0);
    }

    #[test]
    fn counter_ids_resolve_or_reject() {
        assert_eq!(
            TokenCounter::from_id("whitespace").unwrap(),
            TokenCounter::Whitespace
        );
        assert_eq!(
            TokenCounter::from_id("chars:4").unwrap(),
            TokenCounter::CharsPerToken(4)
        );
        assert!(matches!(
            TokenCounter::from_id("bpe"),
            Err(PromptError::UnknownCounterId(_))
        ));
        assert_eq!(
            TokenCounter::from_id("chars:0"),
            Err(PromptError::ZeroCharsPerToken)
        );
    }

    #[test]
    fn external_table_weights_with_fallback() {
        let mut per_word = BTreeMap::new();
        per_word.insert("hello".to_string(), 2u32);
        let counter = TokenCounter::ExternalTable(ExternalTokenTable { per_word });
        // "world" falls back to ceil(5/4) = 2.
        assert_eq!(counter.count("hello world"), 4);
        assert_eq!(counter.count("a"), 1);
    }

    #[test]
    fn budget_rejects_reserve_at_or_above_limit() {
        assert!(TokenBudget::new(100, 100, TokenCounter::Whitespace).is_err());
        assert!(TokenBudget::new(100, 200, TokenCounter::Whitespace).is_err());
        assert!(TokenBudget::new(8192, 200, TokenCounter::Whitespace).is_ok());
    }

    #[test]
    fn ordering_descending_then_reverse_then_shuffle() {
        let examples = alloc::vec![
            example("a", 0.9, 2),
            example("b", 0.5, 2),
            example("c", 0.7, 2),
        ];
        let descending = order_examples(&examples, OrderingMode::DescendingRelevance);
        let ids: Vec<&str> = descending.iter().map(|e| e.incident_id.as_str()).collect();
        assert_eq!(ids, ["a", "c", "b"]);

        let ascending = order_examples(&examples, OrderingMode::AscendingRelevance);
        let rev: Vec<&str> = ascending.iter().map(|e| e.incident_id.as_str()).collect();
        assert_eq!(rev, ["b", "c", "a"]);

        let s1 = order_examples(&examples, OrderingMode::ShuffledSeeded(7));
        let s2 = order_examples(&examples, OrderingMode::ShuffledSeeded(7));
        assert_eq!(s1, s2);
    }

    #[test]
    fn ordering_breaks_ties_by_id() {
        let examples = alloc::vec![example("b", 0.5, 1), example("a", 0.5, 1)];
        let descending = order_examples(&examples, OrderingMode::DescendingRelevance);
        assert_eq!(descending[0].incident_id, "a");
    }

    #[test]
    fn zero_shot_prompt_layout() {
        let prompt = assemble_rca_prompt(&[], &incident(), &budget(PROMPT_LIMIT_8K)).unwrap();
        assert_eq!(
            prompt.text,
            "I want you to act as a software engineer to figure out the root cause of incidents.\n\nTitle: T\nSummary: S\nRoot Cause:"
        );
        assert!(prompt.examples_used.is_empty());
        assert!(!prompt.truncated);
    }

    #[test]
    fn few_shot_prompt_layout_preserves_order() {
        let examples = alloc::vec![example("a", 0.9, 3), example("b", 0.8, 3)];
        let prompt =
            assemble_rca_prompt(&examples, &incident(), &budget(PROMPT_LIMIT_8K)).unwrap();
        assert!(prompt.text.starts_with(
            "I want you to act as a software engineer to figure out the root cause of incidents. I will provide some examples to start with.\n\nTitle: Example a\n"
        ));
        assert_eq!(prompt.examples_used, ["a", "b"]);
        let a_pos = prompt.text.find("Example a").unwrap();
        let b_pos = prompt.text.find("Example b").unwrap();
        assert!(a_pos < b_pos);
        assert!(prompt.text.ends_with("Root Cause:"));
        assert_eq!(prompt.text.matches("Root Cause:").count(), 3);
    }

    #[test]
    fn fixed_k_drops_lowest_relevance_until_fit() {
        let examples: Vec<InContextExample> = (0..20)
            .map(|i| example(&alloc::format!("e{i:02}"), 1.0 - i as f64 * 0.01, 20))
            .collect();
        // Each block is ~26 tokens; admit roughly three examples.
        let tight = TokenBudget::new(300, 200, TokenCounter::Whitespace).unwrap();
        let prompt = assemble_rca_prompt(&examples, &incident(), &tight).unwrap();
        assert_eq!(prompt.examples_used, ["e00", "e01"]);
        assert!(prompt.truncated);
        assert!(prompt.token_count <= tight.available());
    }

    #[test]
    fn oversized_single_example_leaves_zero_shot_prompt() {
        let big = example("big", 0.99, 500);
        let tight = TokenBudget::new(300, 200, TokenCounter::Whitespace).unwrap();
        let prompt = assemble_rca_prompt(&[big], &incident(), &tight).unwrap();
        assert!(prompt.examples_used.is_empty());
        assert!(prompt.truncated);
        assert!(prompt.text.ends_with("Root Cause:"));
    }

    #[test]
    fn fixed_k_keeps_prefix_of_descending_order() {
        let examples: Vec<InContextExample> = (0..12)
            .map(|i| example(&alloc::format!("e{i:02}"), 1.0 - i as f64 * 0.05, 15))
            .collect();
        let ordered = order_examples(&examples, OrderingMode::DescendingRelevance);
        let tight = TokenBudget::new(320, 200, TokenCounter::Whitespace).unwrap();
        let prompt = assemble_rca_prompt(&ordered, &incident(), &tight).unwrap();
        let expected_prefix: Vec<String> = ordered
            .iter()
            .take(prompt.examples_used.len())
            .map(|e| e.incident_id.clone())
            .collect();
        assert_eq!(prompt.examples_used, expected_prefix);
    }

    #[test]
    fn full_prompt_retains_more_at_a_larger_limit() {
        let examples: Vec<InContextExample> = (0..200)
            .map(|i| example(&alloc::format!("e{i:03}"), 1.0 - i as f64 * 0.001, 60))
            .collect();
        let inc = incident();
        let small = fit_to_budget(&examples, &inc, &budget(PROMPT_LIMIT_8K), FitMode::FullPrompt);
        let large = fit_to_budget(&examples, &inc, &budget(PROMPT_LIMIT_32K), FitMode::FullPrompt);
        assert!(small.kept.len() < examples.len());
        assert!(large.kept.len() >= small.kept.len());
        // Greedy fill keeps a relevance-descending prefix.
        assert_eq!(small.kept[0].incident_id, "e000");
    }

    #[test]
    fn new_incident_block_alone_can_exceed_budget() {
        let mut inc = incident();
        inc.summary_raw = (0..500)
            .map(|i| alloc::format!("w{i}"))
            .collect::<Vec<_>>()
            .join(" ");
        let tight = TokenBudget::new(300, 200, TokenCounter::Whitespace).unwrap();
        assert!(matches!(
            assemble_rca_prompt(&[], &inc, &tight),
            Err(PromptError::NewIncidentTooLarge { .. })
        ));
    }

    fn chunk(id: &str, words: usize) -> Chunk {
        let filler: Vec<String> = (0..words).map(|i| alloc::format!("c{i}")).collect();
        Chunk {
            chunk_id: id.to_string(),
            source_incident_id: "SRC".to_string(),
            text: filler.join(" "),
            token_count: words,
        }
    }

    #[test]
    fn chunked_prompt_embeds_passages_verbatim() {
        let chunks = alloc::vec![chunk("SRC#0", 5), chunk("SRC#1", 5)];
        let prompt =
            assemble_chunked_prompt(&chunks, &incident(), &budget(PROMPT_LIMIT_8K)).unwrap();
        assert!(prompt.text.contains(&chunks[0].text));
        assert!(prompt.text.contains(&chunks[1].text));
        assert!(!prompt.text.contains("Root Cause: c0"));
        assert_eq!(prompt.examples_used, ["SRC#0", "SRC#1"]);
        assert!(prompt.text.ends_with("Root Cause:"));
    }

    #[test]
    fn chunked_prompt_with_no_chunks_is_zero_shot() {
        let zero_shot = assemble_rca_prompt(&[], &incident(), &budget(PROMPT_LIMIT_8K)).unwrap();
        let chunked = assemble_chunked_prompt(&[], &incident(), &budget(PROMPT_LIMIT_8K)).unwrap();
        assert_eq!(zero_shot.text, chunked.text);
    }

    #[test]
    fn chunked_overflow_drops_trailing_chunks() {
        // Task line (25) + new block (6) leaves 69 tokens: two 30-token
        // chunks fit, the third does not.
        let chunks = alloc::vec![chunk("SRC#0", 30), chunk("SRC#1", 30), chunk("SRC#2", 30)];
        let tight = TokenBudget::new(300, 200, TokenCounter::Whitespace).unwrap();
        let prompt = assemble_chunked_prompt(&chunks, &incident(), &tight).unwrap();
        assert_eq!(prompt.examples_used, ["SRC#0", "SRC#1"]);
        assert!(prompt.truncated);
    }

    #[test]
    fn token_count_respects_budget_invariant() {
        for limit in [PROMPT_LIMIT_8K, PROMPT_LIMIT_32K] {
            let examples: Vec<InContextExample> = (0..40)
                .map(|i| example(&alloc::format!("e{i:02}"), 1.0 - i as f64 * 0.02, 120))
                .collect();
            let prompt = assemble_rca_prompt(&examples, &incident(), &budget(limit)).unwrap();
            assert!(prompt.token_count <= limit - DEFAULT_COMPLETION_RESERVE);
        }
    }
}
