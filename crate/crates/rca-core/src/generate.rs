//! Root-cause generation from an assembled prompt.
//!
//! `generate_root_cause` is a thin, provenance-preserving wrapper around a
//! [`CompletionProvider`]. The offline [`MockRcaProvider`] answers with the
//! root cause of the first in-context example, which makes retrieval quality
//! directly observable in downstream metric scores and keeps end-to-end
//! experiments fully deterministic.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::prompt::AssembledPrompt;
use crate::provider::{CompletionProvider, CompletionRequest, ProviderError};

/// Generation-call settings. Temperature 0 and a 200-token completion are
/// the defaults used throughout.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GenerationConfig {
    pub temperature: f64,
    pub max_completion_tokens: u32,
    pub model_id: String,
    pub endpoint: String,
}

impl Default for GenerationConfig {
    fn default() -> Self {
        GenerationConfig {
            temperature: 0.0,
            max_completion_tokens: 200,
            model_id: "mock-rca".to_string(),
            endpoint: String::new(),
        }
    }
}

impl GenerationConfig {
    pub fn validate(&self) -> Result<(), GenerateError> {
        if !(self.temperature >= 0.0) {
            return Err(GenerateError::InvalidConfig(
                "temperature must be non-negative".to_string(),
            ));
        }
        if self.max_completion_tokens == 0 {
            return Err(GenerateError::InvalidConfig(
                "max_completion_tokens must be positive".to_string(),
            ));
        }
        Ok(())
    }
}

/// A generated root cause with full provenance.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct RootCauseSuggestion {
    pub text: String,
    pub prompt_token_count: usize,
    pub examples_used: Vec<String>,
    pub provider_id: String,
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum GenerateError {
    #[error("prompt text is empty")]
    EmptyPrompt,
    #[error("invalid generation config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Provider(#[from] ProviderError),
}

/// Run the provider over an assembled prompt, trimming surrounding
/// whitespace and carrying the prompt's example ids into the suggestion.
pub fn generate_root_cause(
    provider: &dyn CompletionProvider,
    prompt: &AssembledPrompt,
    config: &GenerationConfig,
) -> Result<RootCauseSuggestion, GenerateError> {
    config.validate()?;
    if prompt.text.is_empty() {
        return Err(GenerateError::EmptyPrompt);
    }
    let completion = provider.complete(&CompletionRequest {
        prompt: &prompt.text,
        temperature: config.temperature,
        max_tokens: config.max_completion_tokens,
        model_id: &config.model_id,
    })?;
    let text = completion.trim();
    if text.is_empty() {
        return Err(GenerateError::Provider(ProviderError::EmptyCompletion));
    }
    Ok(RootCauseSuggestion {
        text: text.to_string(),
        prompt_token_count: prompt.token_count,
        examples_used: prompt.examples_used.clone(),
        provider_id: provider.id().to_string(),
    })
}

/// Fixed answer for prompts with no usable example.
pub const UNKNOWN_ROOT_CAUSE: &str = "Root cause unknown.";

/// Offline generation oracle: the root cause of the first example block in
/// the prompt, or [`UNKNOWN_ROOT_CAUSE`] for a zero-shot prompt. The final
/// `Root Cause:` line (no trailing content) is never picked.
pub fn mock_generate(prompt_text: &str) -> String {
    prompt_text
        .lines()
        .find_map(|line| {
            line.strip_prefix("Root Cause: ")
                .filter(|rest| !rest.trim().is_empty())
        })
        .unwrap_or(UNKNOWN_ROOT_CAUSE)
        .to_string()
}

/// [`CompletionProvider`] wrapper around [`mock_generate`].
#[derive(Debug, Default, Clone, Copy)]
pub struct MockRcaProvider;

impl CompletionProvider for MockRcaProvider {
    fn id(&self) -> &str {
        "mock-rca"
    }

    fn complete(&self, request: &CompletionRequest<'_>) -> Result<String, ProviderError> {
        Ok(mock_generate(request.prompt))
    }
}
