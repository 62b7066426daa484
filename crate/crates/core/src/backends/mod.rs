//! Interfaces to the external model services.
//!
//! Four roles are modeled: embedding, reranking, translation and chat
//! completion. Each has an HTTP implementation in [`http`] and a
//! deterministic stand-in in [`mock`]. All handles are `Send + Sync` and
//! are shared across worker threads.

pub mod http;
pub mod mock;

use std::collections::BTreeMap;
use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::types::LanguageCode;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BackendError {
    #[error("{endpoint}: transport failure after {attempts} attempt(s): {message}")]
    Transport {
        endpoint: String,
        attempts: u32,
        message: String,
    },
    #[error("{endpoint}: HTTP {status} after {attempts} attempt(s): {body}")]
    Http {
        endpoint: String,
        status: u16,
        attempts: u32,
        body: String,
    },
    #[error("{endpoint}: protocol error: {message}")]
    Protocol { endpoint: String, message: String },
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("backend configuration: {0}")]
    Config(String),
}

impl BackendError {
    pub(crate) fn protocol(endpoint: impl Into<String>, message: impl Into<String>) -> Self {
        BackendError::Protocol {
            endpoint: endpoint.into(),
            message: message.into(),
        }
    }

    /// Attempts spent before giving up, when known.
    pub fn attempts(&self) -> Option<u32> {
        match self {
            BackendError::Transport { attempts, .. } | BackendError::Http { attempts, .. } => {
                Some(*attempts)
            }
            _ => None,
        }
    }
}

fn default_timeout_secs() -> f64 {
    60.0
}

fn default_max_retries() -> u32 {
    3
}

fn default_parallelism() -> usize {
    4
}

fn default_backoff_ms() -> u64 {
    250
}

/// Connection settings for one model role.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackendConfig {
    pub base_url: String,
    #[serde(default, skip_serializing)]
    pub api_key: Option<String>,
    /// Environment variable that overrides `api_key` when set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub api_key_env: Option<String>,
    pub model_name: String,
    #[serde(default = "default_timeout_secs")]
    pub timeout_secs: f64,
    #[serde(default = "default_max_retries")]
    pub max_retries: u32,
    #[serde(default = "default_parallelism")]
    pub parallelism: usize,
    #[serde(default = "default_backoff_ms")]
    pub initial_backoff_ms: u64,
    /// Internal language code → backend-specific code (e.g. `ko` → `kor_Hang`).
    #[serde(default)]
    pub language_code_map: BTreeMap<LanguageCode, String>,
}

impl BackendConfig {
    pub fn new(base_url: impl Into<String>, model_name: impl Into<String>) -> Self {
        BackendConfig {
            base_url: base_url.into(),
            api_key: None,
            api_key_env: None,
            model_name: model_name.into(),
            timeout_secs: default_timeout_secs(),
            max_retries: default_max_retries(),
            parallelism: default_parallelism(),
            initial_backoff_ms: default_backoff_ms(),
            language_code_map: BTreeMap::new(),
        }
    }

    pub fn validate(&self) -> Result<(), BackendError> {
        if !(self.timeout_secs.is_finite() && self.timeout_secs > 0.0) {
            return Err(BackendError::Config(format!(
                "timeout_secs must be positive, got {}",
                self.timeout_secs
            )));
        }
        if self.parallelism == 0 {
            return Err(BackendError::Config("parallelism must be at least 1".into()));
        }
        if !(self.base_url.starts_with("http://") || self.base_url.starts_with("https://")) {
            return Err(BackendError::Config(format!(
                "base_url must be an http(s) URL, got {:?}",
                self.base_url
            )));
        }
        Ok(())
    }

    pub fn timeout(&self) -> Duration {
        Duration::from_secs_f64(self.timeout_secs)
    }

    pub fn retry_policy(&self) -> RetryPolicy {
        RetryPolicy {
            max_retries: self.max_retries,
            initial_backoff: Duration::from_millis(self.initial_backoff_ms),
            max_backoff: Duration::from_secs(30),
        }
    }

    /// The API key after applying the environment override.
    pub fn resolved_api_key(&self) -> Option<String> {
        self.api_key_env
            .as_deref()
            .and_then(|var| std::env::var(var).ok())
            .filter(|k| !k.is_empty())
            .or_else(|| self.api_key.clone())
    }

    pub fn backend_code(&self, lang: LanguageCode) -> String {
        self.language_code_map
            .get(&lang)
            .cloned()
            .unwrap_or_else(|| lang.to_string())
    }
}

/// Exponential backoff: `initial_backoff * 2^(attempt-1)`, capped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RetryPolicy {
    pub max_retries: u32,
    pub initial_backoff: Duration,
    pub max_backoff: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy {
            max_retries: 3,
            initial_backoff: Duration::from_millis(250),
            max_backoff: Duration::from_secs(30),
        }
    }
}

/// Outcome of a single attempt inside [`RetryPolicy::run`].
#[derive(Debug)]
pub enum AttemptError {
    Retryable(BackendError),
    Fatal(BackendError),
}

impl RetryPolicy {
    pub fn none() -> Self {
        RetryPolicy {
            max_retries: 0,
            initial_backoff: Duration::ZERO,
            max_backoff: Duration::ZERO,
        }
    }

    pub fn backoff(&self, attempt: u32) -> Duration {
        let factor = 2u32.saturating_pow(attempt.saturating_sub(1));
        self.initial_backoff
            .saturating_mul(factor)
            .min(self.max_backoff)
    }

    /// Runs `op` until it succeeds, fails fatally, or `1 + max_retries`
    /// attempts are spent. `op` receives the 1-based attempt number.
    pub fn run<T>(
        &self,
        mut op: impl FnMut(u32) -> Result<T, AttemptError>,
    ) -> Result<T, BackendError> {
        let mut attempt = 1;
        loop {
            match op(attempt) {
                Ok(value) => return Ok(value),
                Err(AttemptError::Fatal(e)) => return Err(e),
                Err(AttemptError::Retryable(e)) => {
                    if attempt > self.max_retries {
                        return Err(e);
                    }
                    log::debug!("attempt {attempt} failed, retrying: {e}");
                    thread::sleep(self.backoff(attempt));
                    attempt += 1;
                }
            }
        }
    }
}

/// System/user message pair for a chat-completion call.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatRequest {
    pub system: String,
    pub user: String,
    pub temperature: f64,
    pub max_tokens: u32,
}

impl ChatRequest {
    pub const DEFAULT_MAX_TOKENS: u32 = 512;

    /// Temperature 0, default token budget.
    pub fn new(system: impl Into<String>, user: impl Into<String>) -> Self {
        ChatRequest {
            system: system.into(),
            user: user.into(),
            temperature: 0.0,
            max_tokens: Self::DEFAULT_MAX_TOKENS,
        }
    }

    pub fn validate(&self) -> Result<(), BackendError> {
        if self.system.trim().is_empty() || self.user.trim().is_empty() {
            return Err(BackendError::Contract(
                "chat request needs non-empty system and user messages".into(),
            ));
        }
        if !(self.temperature.is_finite() && self.temperature >= 0.0) {
            return Err(BackendError::Contract(format!(
                "temperature must be >= 0, got {}",
                self.temperature
            )));
        }
        if self.max_tokens == 0 {
            return Err(BackendError::Contract("max_tokens must be positive".into()));
        }
        Ok(())
    }
}

pub trait Embedder: Send + Sync {
    /// One unit-length vector per text, all of equal dimension.
    fn embed_batch(&self, texts: &[String]) -> Result<Vec<Vec<f64>>, BackendError>;

    /// Identifies the embedding model; recorded in built indices.
    fn fingerprint(&self) -> String;
}

pub trait Reranker: Send + Sync {
    /// One relevance score per passage, aligned with the input order.
    fn rerank_pairs(&self, query: &str, passages: &[String]) -> Result<Vec<f64>, BackendError>;

    fn fingerprint(&self) -> String;
}

pub trait Translator: Send + Sync {
    /// Translates `text` from `src` to `tgt`; `src == tgt` is a contract
    /// violation.
    fn translate_text(
        &self,
        text: &str,
        src: LanguageCode,
        tgt: LanguageCode,
    ) -> Result<String, BackendError>;

    fn fingerprint(&self) -> String;
}

pub trait ChatBackend: Send + Sync {
    /// The assistant message, verbatim.
    fn chat_complete(&self, request: &ChatRequest) -> Result<String, BackendError>;

    fn fingerprint(&self) -> String;
}

pub(crate) fn check_embed_input(texts: &[String]) -> Result<(), BackendError> {
    if texts.is_empty() {
        return Err(BackendError::Contract("embed_batch needs at least one text".into()));
    }
    if let Some(i) = texts.iter().position(|t| t.is_empty()) {
        return Err(BackendError::Contract(format!("embed_batch text {i} is empty")));
    }
    Ok(())
}

pub(crate) fn check_translate_input(
    src: LanguageCode,
    tgt: LanguageCode,
) -> Result<(), BackendError> {
    if src == tgt {
        return Err(BackendError::Contract(format!(
            "translation requested from {src} to itself"
        )));
    }
    Ok(())
}

/// Checks shape and normalizes every vector to unit length in place.
pub(crate) fn finish_embeddings(
    endpoint: &str,
    expected: usize,
    mut vectors: Vec<Vec<f64>>,
) -> Result<Vec<Vec<f64>>, BackendError> {
    if vectors.len() != expected {
        return Err(BackendError::protocol(
            endpoint,
            format!("expected {expected} vectors, got {}", vectors.len()),
        ));
    }
    let dim = vectors.first().map_or(0, Vec::len);
    if dim == 0 {
        return Err(BackendError::protocol(endpoint, "empty embedding vector"));
    }
    for (i, v) in vectors.iter_mut().enumerate() {
        if v.len() != dim {
            return Err(BackendError::protocol(
                endpoint,
                format!("vector {i} has dimension {}, expected {dim}", v.len()),
            ));
        }
        if !crate::scalar::l2_normalize(v.as_mut_slice()) {
            return Err(BackendError::protocol(
                endpoint,
                format!("vector {i} has zero or non-finite norm"),
            ));
        }
    }
    Ok(vectors)
}
