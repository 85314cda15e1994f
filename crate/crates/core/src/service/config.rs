use std::path::PathBuf;
use std::time::Duration;

use thiserror::Error;

use crate::llm::{ApiKey, Backend, LlmConfig, DEFAULT_MAX_IN_FLIGHT};
use crate::summarizer::DEFAULT_BUDGET_TOKENS;
use crate::validator::Thresholds;

pub const DEFAULT_PORT: u16 = 8080;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{var}: {message}")]
    Invalid { var: &'static str, message: String },
    #[error("LLM_BACKEND=remote requires {0}")]
    MissingCredential(&'static str),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ServiceConfig {
    pub port: u16,
    pub corpus_path: Option<PathBuf>,
    pub llm: LlmConfig,
    pub budget_tokens: usize,
    pub thresholds: Thresholds,
    pub allowed_origin: Option<String>,
    pub templates_path: Option<PathBuf>,
    /// Year used for popularity decay; the current year when unset.
    pub now_year: Option<i32>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            port: DEFAULT_PORT,
            corpus_path: None,
            llm: LlmConfig::mock(),
            budget_tokens: DEFAULT_BUDGET_TOKENS,
            thresholds: Thresholds::default(),
            allowed_origin: None,
            templates_path: None,
            now_year: None,
        }
    }
}

fn parsed<T: std::str::FromStr>(
    lookup: &impl Fn(&str) -> Option<String>,
    var: &'static str,
) -> Result<Option<T>, ConfigError>
where
    T::Err: std::fmt::Display,
{
    match lookup(var).filter(|v| !v.trim().is_empty()) {
        None => Ok(None),
        Some(raw) => raw
            .trim()
            .parse::<T>()
            .map(Some)
            .map_err(|e| ConfigError::Invalid {
                var,
                message: format!("cannot parse {raw:?}: {e}"),
            }),
    }
}

fn non_empty(lookup: &impl Fn(&str) -> Option<String>, var: &str) -> Option<String> {
    lookup(var).filter(|v| !v.trim().is_empty())
}

impl ServiceConfig {
    pub fn from_env() -> Result<Self, ConfigError> {
        Self::from_lookup(|k| std::env::var(k).ok())
    }

    /// Reads every setting through `lookup` (an environment-variable getter)
    /// and validates the result.
    pub fn from_lookup(lookup: impl Fn(&str) -> Option<String>) -> Result<Self, ConfigError> {
        let cfg = Self::parse(lookup)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Like [`ServiceConfig::from_lookup`] but leaves cross-field checks
    /// (remote credentials) to a later [`ServiceConfig::validate`], so callers
    /// can apply overrides first.
    pub fn parse(lookup: impl Fn(&str) -> Option<String>) -> Result<Self, ConfigError> {
        let mut cfg = ServiceConfig::default();

        if let Some(port) = parsed(&lookup, "PORT")? {
            cfg.port = port;
        }
        cfg.corpus_path = non_empty(&lookup, "CORPUS_PATH").map(PathBuf::from);
        cfg.templates_path = non_empty(&lookup, "PROMPT_TEMPLATES").map(PathBuf::from);
        cfg.allowed_origin = non_empty(&lookup, "ALLOWED_ORIGIN");
        cfg.now_year = parsed(&lookup, "NOW_YEAR")?;

        if let Some(budget) = parsed::<usize>(&lookup, "BUDGET_TOKENS")? {
            if budget == 0 {
                return Err(ConfigError::Invalid {
                    var: "BUDGET_TOKENS",
                    message: "must be positive".into(),
                });
            }
            cfg.budget_tokens = budget;
        }
        if let Some(fail) = parsed::<f64>(&lookup, "COVERAGE_FAIL_THRESHOLD")? {
            cfg.thresholds.fail = unit_interval("COVERAGE_FAIL_THRESHOLD", fail)?;
        }
        if let Some(g) = parsed::<f64>(&lookup, "GROUNDING_THRESHOLD")? {
            cfg.thresholds.grounding = unit_interval("GROUNDING_THRESHOLD", g)?;
        }

        let llm = &mut cfg.llm;
        if let Some(backend) = parsed::<Backend>(&lookup, "LLM_BACKEND")? {
            llm.backend = backend;
        }
        llm.base_url = non_empty(&lookup, "LLM_BASE_URL").unwrap_or_default();
        llm.api_key = ApiKey::new(non_empty(&lookup, "LLM_API_KEY").unwrap_or_default());
        llm.model = non_empty(&lookup, "LLM_MODEL").unwrap_or_default();
        if let Some(secs) = parsed::<f64>(&lookup, "REQUEST_TIMEOUT_S")? {
            if !(secs > 0.0 && secs.is_finite()) {
                return Err(ConfigError::Invalid {
                    var: "REQUEST_TIMEOUT_S",
                    message: "must be a positive number of seconds".into(),
                });
            }
            llm.timeout = Duration::from_secs_f64(secs);
        }
        if let Some(r) = parsed(&lookup, "RETRY_MAX")? {
            llm.retry_max = r;
        }
        llm.max_in_flight = parsed(&lookup, "LLM_MAX_IN_FLIGHT")?.unwrap_or(DEFAULT_MAX_IN_FLIGHT);
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.llm.backend == Backend::Remote {
            if self.llm.base_url.trim().is_empty() {
                return Err(ConfigError::MissingCredential("LLM_BASE_URL"));
            }
            if self.llm.model.trim().is_empty() {
                return Err(ConfigError::MissingCredential("LLM_MODEL"));
            }
            if self.llm.api_key.is_empty() {
                return Err(ConfigError::MissingCredential("LLM_API_KEY"));
            }
        }
        self.llm.validate().map_err(|e| ConfigError::Invalid {
            var: "LLM_*",
            message: e.to_string(),
        })
    }
}

fn unit_interval(var: &'static str, v: f64) -> Result<f64, ConfigError> {
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(ConfigError::Invalid {
            var,
            message: format!("{v} is outside [0, 1]"),
        })
    }
}
