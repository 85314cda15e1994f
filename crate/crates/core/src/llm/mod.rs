//! Text-generation backends: an OpenAI-compatible chat-completions endpoint
//! or the built-in deterministic mock.

mod mock;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;
use tokio::sync::Semaphore;
use tracing::{debug, warn};

use crate::summarizer::PromptBundle;

pub use mock::{first_sentence, group_sizes, lit_review_paragraphs, mock_generate};

pub const MOCK_MODEL_ID: &str = "mock";
pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(60);
pub const DEFAULT_RETRY_MAX: u32 = 2;
pub const DEFAULT_MAX_IN_FLIGHT: usize = 4;
pub const DEFAULT_BACKOFF_BASE: Duration = Duration::from_millis(500);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LlmError {
    #[error("invalid LLM configuration: {0}")]
    InvalidConfig(String),
    #[error("upstream LLM failed after {attempts} attempt(s){}: {message}", status_suffix(*.status))]
    UpstreamFailed {
        status: Option<u16>,
        message: String,
        attempts: u32,
    },
    #[error("upstream LLM timed out after {attempts} attempt(s)")]
    Timeout { attempts: u32 },
    #[error("upstream LLM rejected the credentials (status {status})")]
    AuthRejected { status: u16 },
    #[error("upstream LLM rejected the request (status {status}): {message}")]
    BadRequestUpstream { status: u16, message: String },
    #[error("upstream LLM returned an unusable response: {0}")]
    InvalidResponse(String),
}

fn status_suffix(status: Option<u16>) -> String {
    status.map(|s| format!(" (status {s})")).unwrap_or_default()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Remote,
    #[default]
    Mock,
}

impl Backend {
    pub fn as_str(self) -> &'static str {
        match self {
            Backend::Remote => "remote",
            Backend::Mock => "mock",
        }
    }
}

impl FromStr for Backend {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "remote" => Ok(Backend::Remote),
            "mock" => Ok(Backend::Mock),
            other => Err(format!(
                "unknown LLM backend {other:?} (expected remote or mock)"
            )),
        }
    }
}

/// A credential that never shows up in `Debug` output.
#[derive(Clone, Default, PartialEq, Eq)]
pub struct ApiKey(String);

impl ApiKey {
    pub fn new(key: impl Into<String>) -> Self {
        Self(key.into())
    }

    pub fn expose(&self) -> &str {
        &self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Debug for ApiKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("ApiKey(***)")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LlmConfig {
    pub backend: Backend,
    /// Base of the API, e.g. `https://api.example.com/v1`; `/chat/completions` is appended.
    pub base_url: String,
    pub api_key: ApiKey,
    pub model: String,
    pub timeout: Duration,
    pub retry_max: u32,
    pub max_in_flight: usize,
    pub backoff_base: Duration,
    pub temperature: Option<f32>,
    pub max_tokens: Option<u32>,
}

impl Default for LlmConfig {
    fn default() -> Self {
        Self {
            backend: Backend::Mock,
            base_url: String::new(),
            api_key: ApiKey::default(),
            model: String::new(),
            timeout: DEFAULT_TIMEOUT,
            retry_max: DEFAULT_RETRY_MAX,
            max_in_flight: DEFAULT_MAX_IN_FLIGHT,
            backoff_base: DEFAULT_BACKOFF_BASE,
            temperature: None,
            max_tokens: None,
        }
    }
}

impl LlmConfig {
    pub fn mock() -> Self {
        Self::default()
    }

    pub fn remote(base_url: impl Into<String>, api_key: ApiKey, model: impl Into<String>) -> Self {
        Self {
            backend: Backend::Remote,
            base_url: base_url.into(),
            api_key,
            model: model.into(),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), LlmError> {
        if self.max_in_flight == 0 {
            return Err(LlmError::InvalidConfig(
                "max_in_flight must be positive".into(),
            ));
        }
        if self.timeout.is_zero() {
            return Err(LlmError::InvalidConfig("timeout must be positive".into()));
        }
        if self.backend == Backend::Remote {
            if self.base_url.trim().is_empty() {
                return Err(LlmError::InvalidConfig(
                    "remote backend needs a base URL".into(),
                ));
            }
            url::Url::parse(&self.base_url)
                .map_err(|e| LlmError::InvalidConfig(format!("bad base URL: {e}")))?;
            if self.model.trim().is_empty() {
                return Err(LlmError::InvalidConfig(
                    "remote backend needs a model".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn endpoint(&self) -> String {
        format!("{}/chat/completions", self.base_url.trim_end_matches('/'))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GenerationOutcome {
    pub text: String,
    pub model_id: String,
    pub latency_ms: u64,
    pub attempts: u32,
}

#[derive(Debug, Serialize)]
struct ChatMessage<'a> {
    role: &'static str,
    content: &'a str,
}

#[derive(Debug, Serialize)]
struct ChatRequest<'a> {
    model: &'a str,
    messages: [ChatMessage<'a>; 2],
    #[serde(skip_serializing_if = "Option::is_none")]
    temperature: Option<f32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    max_tokens: Option<u32>,
}

#[derive(Debug, Deserialize)]
struct ChatResponse {
    #[serde(default)]
    model: Option<String>,
    #[serde(default)]
    choices: Vec<ChatChoice>,
}

#[derive(Debug, Deserialize)]
struct ChatChoice {
    message: ChatResponseMessage,
}

#[derive(Debug, Deserialize)]
struct ChatResponseMessage {
    #[serde(default)]
    content: Option<String>,
}

/// The chat-completions request body sent for `bundle`.
pub fn chat_request_body(bundle: &PromptBundle, config: &LlmConfig) -> serde_json::Value {
    let request = ChatRequest {
        model: &config.model,
        messages: [
            ChatMessage {
                role: "system",
                content: &bundle.system_prompt,
            },
            ChatMessage {
                role: "user",
                content: &bundle.user_message,
            },
        ],
        temperature: config.temperature,
        max_tokens: config.max_tokens,
    };
    serde_json::to_value(request).expect("chat request serializes")
}

enum AttemptError {
    Retryable(LlmError),
    Fatal(LlmError),
}

/// Shared client. Concurrent calls beyond `max_in_flight` queue in FIFO order.
#[derive(Debug, Clone)]
pub struct LlmClient {
    config: LlmConfig,
    http: reqwest::Client,
    permits: Arc<Semaphore>,
}

impl LlmClient {
    pub fn new(config: LlmConfig) -> Result<Self, LlmError> {
        config.validate()?;
        let http = reqwest::Client::builder()
            .build()
            .map_err(|e| LlmError::InvalidConfig(e.to_string()))?;
        let permits = Arc::new(Semaphore::new(config.max_in_flight));
        Ok(Self {
            config,
            http,
            permits,
        })
    }

    pub fn config(&self) -> &LlmConfig {
        &self.config
    }

    pub fn backend(&self) -> Backend {
        self.config.backend
    }

    pub async fn complete(&self, bundle: &PromptBundle) -> Result<GenerationOutcome, LlmError> {
        let _permit = self
            .permits
            .acquire()
            .await
            .expect("semaphore is never closed");
        let started = Instant::now();
        match self.config.backend {
            Backend::Mock => Ok(GenerationOutcome {
                text: mock_generate(bundle),
                model_id: MOCK_MODEL_ID.to_string(),
                latency_ms: started.elapsed().as_millis() as u64,
                attempts: 1,
            }),
            Backend::Remote => self.complete_remote(bundle, started).await,
        }
    }

    async fn complete_remote(
        &self,
        bundle: &PromptBundle,
        started: Instant,
    ) -> Result<GenerationOutcome, LlmError> {
        let body = chat_request_body(bundle, &self.config);
        let endpoint = self.config.endpoint();
        let mut attempts = 0u32;
        loop {
            attempts += 1;
            debug!(endpoint = %endpoint, model = %self.config.model, attempt = attempts, "sending chat completion");
            let failure = match self.send_once(&endpoint, &body).await {
                Ok((text, model_id)) => {
                    return Ok(GenerationOutcome {
                        text,
                        model_id,
                        latency_ms: started.elapsed().as_millis() as u64,
                        attempts,
                    })
                }
                Err(AttemptError::Fatal(e)) => return Err(e),
                Err(AttemptError::Retryable(e)) => e,
            };
            if attempts > self.config.retry_max {
                return Err(with_attempts(failure, attempts));
            }
            let delay = self.config.backoff_base * 2u32.saturating_pow(attempts - 1);
            warn!(attempt = attempts, error = %failure, delay_ms = delay.as_millis() as u64, "retrying chat completion");
            tokio::time::sleep(delay).await;
        }
    }

    async fn send_once(
        &self,
        endpoint: &str,
        body: &serde_json::Value,
    ) -> Result<(String, String), AttemptError> {
        let mut request = self
            .http
            .post(endpoint)
            .timeout(self.config.timeout)
            .json(body);
        if !self.config.api_key.is_empty() {
            request = request.bearer_auth(self.config.api_key.expose());
        }

        let response = request.send().await.map_err(|e| self.transport_error(e))?;
        let status = response.status();
        if status.is_success() {
            let parsed: ChatResponse = response.json().await.map_err(|e| {
                if e.is_timeout() {
                    AttemptError::Retryable(LlmError::Timeout { attempts: 0 })
                } else {
                    AttemptError::Fatal(LlmError::InvalidResponse(self.redact(&e.to_string())))
                }
            })?;
            let text = parsed
                .choices
                .into_iter()
                .next()
                .and_then(|c| c.message.content)
                .ok_or_else(|| {
                    AttemptError::Fatal(LlmError::InvalidResponse(
                        "no message content in first choice".into(),
                    ))
                })?;
            let model_id = parsed.model.unwrap_or_else(|| self.config.model.clone());
            return Ok((text, model_id));
        }

        let code = status.as_u16();
        let message = self.redact(&response.text().await.unwrap_or_default());
        match code {
            401 | 403 => Err(AttemptError::Fatal(LlmError::AuthRejected { status: code })),
            400..=499 => Err(AttemptError::Fatal(LlmError::BadRequestUpstream {
                status: code,
                message,
            })),
            _ => Err(AttemptError::Retryable(LlmError::UpstreamFailed {
                status: Some(code),
                message,
                attempts: 0,
            })),
        }
    }

    fn transport_error(&self, e: reqwest::Error) -> AttemptError {
        if e.is_timeout() {
            AttemptError::Retryable(LlmError::Timeout { attempts: 0 })
        } else {
            AttemptError::Retryable(LlmError::UpstreamFailed {
                status: None,
                message: self.redact(&e.to_string()),
                attempts: 0,
            })
        }
    }

    fn redact(&self, text: &str) -> String {
        let key = self.config.api_key.expose();
        if key.is_empty() {
            text.to_string()
        } else {
            text.replace(key, "***")
        }
    }
}

fn with_attempts(error: LlmError, attempts: u32) -> LlmError {
    match error {
        LlmError::UpstreamFailed {
            status, message, ..
        } => LlmError::UpstreamFailed {
            status,
            message,
            attempts,
        },
        LlmError::Timeout { .. } => LlmError::Timeout { attempts },
        other => other,
    }
}
