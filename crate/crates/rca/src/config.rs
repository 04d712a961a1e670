//! Application configuration: a single TOML document that fully determines
//! a run. Provider credentials come from the `RCA_API_KEY` environment
//! variable, never from the file.

use std::path::{Path, PathBuf};

use rca_core::embed::EmbedderConfig;

use crate::providers::ProviderConfig;

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct BudgetConfig {
    pub prompt_limit: usize,
    pub completion_reserve: usize,
    pub counter_id: String,
}

impl Default for BudgetConfig {
    fn default() -> Self {
        BudgetConfig {
            prompt_limit: rca_core::prompt::PROMPT_LIMIT_8K,
            completion_reserve: rca_core::prompt::DEFAULT_COMPLETION_RESERVE,
            counter_id: "whitespace".to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct AppConfig {
    /// Summarized corpus the service retrieves examples from.
    pub corpus_path: PathBuf,
    /// Serialized index over that corpus.
    pub index_path: PathBuf,
    /// Summary cache file.
    pub cache_path: PathBuf,
    pub default_k: usize,
    pub seed: u64,
    pub embedder: EmbedderConfig,
    pub summarizer: ProviderConfig,
    pub generator: ProviderConfig,
    pub budget: BudgetConfig,
}

impl Default for AppConfig {
    fn default() -> Self {
        AppConfig {
            corpus_path: PathBuf::from("data/corpus.ndjson"),
            index_path: PathBuf::from("data/index.bin"),
            cache_path: PathBuf::from("data/summary-cache.ndjson"),
            default_k: 20,
            seed: 7,
            embedder: EmbedderConfig::default(),
            summarizer: ProviderConfig::Extractive { sentences: 2 },
            generator: ProviderConfig::Mock,
            budget: BudgetConfig::default(),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Parse {
        path: String,
        source: toml::de::Error,
    },
}

impl AppConfig {
    pub fn load(path: &Path) -> Result<AppConfig, ConfigError> {
        let raw = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.display().to_string(),
            source,
        })?;
        toml::from_str(&raw).map_err(|source| ConfigError::Parse {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_round_trips_through_toml() {
        let config = AppConfig::default();
        let rendered = config.to_toml();
        let parsed: AppConfig = toml::from_str(&rendered).unwrap();
        assert_eq!(parsed, config);
    }

    #[test]
    fn partial_config_files_fill_in_defaults() {
        let parsed: AppConfig = toml::from_str(
            r#"
            default_k = 5

            [generator]
            kind = "remote"
            endpoint = "http://llm.internal/v1/complete"
            model_id = "gpt-large"
            style = "chat"
            "#,
        )
        .unwrap();
        assert_eq!(parsed.default_k, 5);
        assert_eq!(parsed.budget.prompt_limit, 8192);
        assert!(matches!(
            parsed.generator,
            ProviderConfig::Remote { .. }
        ));
    }

    #[test]
    fn load_reports_missing_file() {
        assert!(matches!(
            AppConfig::load(Path::new("/nonexistent/app.toml")),
            Err(ConfigError::Read { .. })
        ));
    }
}
