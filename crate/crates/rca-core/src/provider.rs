//! Completion-provider abstraction.
//!
//! Summarization and root-cause generation both speak to a text-completion
//! backend through [`CompletionProvider`]. Remote HTTP providers live in the
//! companion crate; this crate ships deterministic offline providers (an
//! extractive summarizer and an example-echoing generator) so the whole
//! pipeline runs and tests without network access.

use alloc::string::String;

/// One completion call. `temperature` 0 is the deterministic setting used
/// throughout; `max_tokens` is the completion allowance, not the prompt size.
#[derive(Debug, Clone, PartialEq)]
pub struct CompletionRequest<'a> {
    pub prompt: &'a str,
    pub temperature: f64,
    pub max_tokens: u32,
    pub model_id: &'a str,
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ProviderError {
    #[error("provider transport failure: {0}")]
    Transport(String),
    #[error("provider returned an empty completion")]
    EmptyCompletion,
    #[error("provider reported prompt context overflow")]
    ContextOverflow,
    #[error("provider protocol error: {0}")]
    Protocol(String),
}

/// A text-completion backend. Implementations retry internally; a returned
/// error is final. A successful completion is never retried, so callers see
/// at-most-once semantics.
pub trait CompletionProvider: Send + Sync {
    /// Stable identifier recorded in caches and provenance.
    fn id(&self) -> &str;
    fn complete(&self, request: &CompletionRequest<'_>) -> Result<String, ProviderError>;
}
