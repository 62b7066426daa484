//! JSON-over-HTTP backends.
//!
//! Endpoints, relative to `base_url`:
//!
//! | role       | path                | request                                   |
//! |------------|---------------------|-------------------------------------------|
//! | embedder   | `/embeddings`       | `{"model", "input": [..]}`                |
//! | reranker   | `/rerank`           | `{"model", "query", "documents": [..]}`   |
//! | translator | `/translate`        | `{"text", "src", "tgt"}` (+ `"model"`)    |
//! | chat       | `/chat/completions` | `{"model", "messages", "temperature", "max_tokens"}` |
//!
//! Transport errors, HTTP 429 and 5xx are retried with exponential
//! backoff; other 4xx responses fail immediately. All calls are
//! idempotent reads, so a retry never duplicates a side effect.

use std::sync::{Condvar, Mutex};

use reqwest::blocking::Client;
use serde_json::{json, Value};

use super::{
    check_embed_input, check_translate_input, finish_embeddings, AttemptError, BackendConfig,
    BackendError, ChatBackend, ChatRequest, Embedder, Reranker, Translator,
};
use crate::types::LanguageCode;

/// Caps the number of in-flight requests.
struct Gate {
    permits: Mutex<usize>,
    freed: Condvar,
}

struct Permit<'a>(&'a Gate);

impl Gate {
    fn new(permits: usize) -> Self {
        Gate {
            permits: Mutex::new(permits),
            freed: Condvar::new(),
        }
    }

    fn acquire(&self) -> Permit<'_> {
        let mut free = self.permits.lock().unwrap_or_else(|e| e.into_inner());
        while *free == 0 {
            free = self.freed.wait(free).unwrap_or_else(|e| e.into_inner());
        }
        *free -= 1;
        Permit(self)
    }
}

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        let mut free = self.0.permits.lock().unwrap_or_else(|e| e.into_inner());
        *free += 1;
        self.0.freed.notify_one();
    }
}

/// Shared HTTP plumbing for every role.
pub struct HttpBackend {
    config: BackendConfig,
    client: Client,
    api_key: Option<String>,
    gate: Gate,
}

impl HttpBackend {
    pub fn new(config: BackendConfig) -> Result<Self, BackendError> {
        config.validate()?;
        let client = Client::builder()
            .timeout(config.timeout())
            .build()
            .map_err(|e| BackendError::Config(format!("http client: {e}")))?;
        Ok(HttpBackend {
            api_key: config.resolved_api_key(),
            gate: Gate::new(config.parallelism),
            client,
            config,
        })
    }

    pub fn config(&self) -> &BackendConfig {
        &self.config
    }

    fn endpoint(&self, path: &str) -> String {
        format!("{}{}", self.config.base_url.trim_end_matches('/'), path)
    }

    fn fingerprint(&self, role: &str) -> String {
        format!("{role}:{}@{}", self.config.model_name, self.config.base_url)
    }

    /// POSTs `body` and returns the parsed JSON response.
    pub fn post_json(&self, path: &str, body: &Value) -> Result<Value, BackendError> {
        let endpoint = self.endpoint(path);
        let _permit = self.gate.acquire();
        self.config.retry_policy().run(|attempt| {
            let mut request = self.client.post(&endpoint).json(body);
            if let Some(key) = &self.api_key {
                request = request.bearer_auth(key);
            }
            let response = request.send().map_err(|e| {
                AttemptError::Retryable(BackendError::Transport {
                    endpoint: endpoint.clone(),
                    attempts: attempt,
                    message: e.to_string(),
                })
            })?;
            let status = response.status();
            let text = response.text().map_err(|e| {
                AttemptError::Retryable(BackendError::Transport {
                    endpoint: endpoint.clone(),
                    attempts: attempt,
                    message: format!("reading body: {e}"),
                })
            })?;
            if !status.is_success() {
                let err = BackendError::Http {
                    endpoint: endpoint.clone(),
                    status: status.as_u16(),
                    attempts: attempt,
                    body: text.chars().take(512).collect(),
                };
                return Err(if status.is_server_error() || status.as_u16() == 429 {
                    AttemptError::Retryable(err)
                } else {
                    AttemptError::Fatal(err)
                });
            }
            serde_json::from_str(&text).map_err(|e| {
                AttemptError::Fatal(BackendError::protocol(
                    endpoint.clone(),
                    format!("invalid JSON response: {e}"),
                ))
            })
        })
    }
}

fn number_array(endpoint: &str, v: &Value) -> Result<Vec<f64>, BackendError> {
    v.as_array()
        .ok_or_else(|| BackendError::protocol(endpoint, "embedding is not an array"))?
        .iter()
        .map(|x| {
            x.as_f64()
                .ok_or_else(|| BackendError::protocol(endpoint, "non-numeric embedding value"))
        })
        .collect()
}

pub struct HttpEmbedder(HttpBackend);

impl HttpEmbedder {
    pub fn new(config: BackendConfig) -> Result<Self, BackendError> {
        HttpBackend::new(config).map(HttpEmbedder)
    }
}

impl Embedder for HttpEmbedder {
    fn embed_batch(&self, texts: &[String]) -> Result<Vec<Vec<f64>>, BackendError> {
        check_embed_input(texts)?;
        let endpoint = self.0.endpoint("/embeddings");
        let body = json!({ "model": self.0.config.model_name, "input": texts });
        let response = self.0.post_json("/embeddings", &body)?;
        let data = response
            .get("data")
            .and_then(Value::as_array)
            .ok_or_else(|| BackendError::protocol(&endpoint, "missing `data` array"))?;
        let mut rows: Vec<(usize, Vec<f64>)> = Vec::with_capacity(data.len());
        for (pos, item) in data.iter().enumerate() {
            let index = item
                .get("index")
                .and_then(Value::as_u64)
                .map_or(pos, |i| i as usize);
            let embedding = item
                .get("embedding")
                .ok_or_else(|| BackendError::protocol(&endpoint, "missing `embedding`"))?;
            rows.push((index, number_array(&endpoint, embedding)?));
        }
        rows.sort_by_key(|(i, _)| *i);
        finish_embeddings(&endpoint, texts.len(), rows.into_iter().map(|(_, v)| v).collect())
    }

    fn fingerprint(&self) -> String {
        self.0.fingerprint("embedder")
    }
}

pub struct HttpReranker(HttpBackend);

impl HttpReranker {
    pub fn new(config: BackendConfig) -> Result<Self, BackendError> {
        HttpBackend::new(config).map(HttpReranker)
    }
}

impl Reranker for HttpReranker {
    fn rerank_pairs(&self, query: &str, passages: &[String]) -> Result<Vec<f64>, BackendError> {
        if passages.is_empty() {
            return Err(BackendError::Contract("rerank_pairs needs passages".into()));
        }
        let endpoint = self.0.endpoint("/rerank");
        let body = json!({
            "model": self.0.config.model_name,
            "query": query,
            "documents": passages,
        });
        let response = self.0.post_json("/rerank", &body)?;
        // Either {"scores": [..]} aligned with input, or
        // {"results": [{"index", "relevance_score"}]} in any order.
        let scores = if let Some(scores) = response.get("scores") {
            number_array(&endpoint, scores)?
        } else {
            let results = response
                .get("results")
                .and_then(Value::as_array)
                .ok_or_else(|| BackendError::protocol(&endpoint, "missing `results`"))?;
            let mut scores = vec![None; passages.len()];
            for item in results {
                let index = item
                    .get("index")
                    .and_then(Value::as_u64)
                    .ok_or_else(|| BackendError::protocol(&endpoint, "result without index"))?
                    as usize;
                let score = item
                    .get("relevance_score")
                    .or_else(|| item.get("score"))
                    .and_then(Value::as_f64)
                    .ok_or_else(|| BackendError::protocol(&endpoint, "result without score"))?;
                let slot = scores.get_mut(index).ok_or_else(|| {
                    BackendError::protocol(&endpoint, format!("result index {index} out of range"))
                })?;
                *slot = Some(score);
            }
            scores
                .into_iter()
                .enumerate()
                .map(|(i, s)| {
                    s.ok_or_else(|| {
                        BackendError::protocol(&endpoint, format!("no score for passage {i}"))
                    })
                })
                .collect::<Result<_, _>>()?
        };
        if scores.len() != passages.len() {
            return Err(BackendError::protocol(
                &endpoint,
                format!("expected {} scores, got {}", passages.len(), scores.len()),
            ));
        }
        Ok(scores)
    }

    fn fingerprint(&self) -> String {
        self.0.fingerprint("reranker")
    }
}

pub struct HttpTranslator(HttpBackend);

impl HttpTranslator {
    pub fn new(config: BackendConfig) -> Result<Self, BackendError> {
        HttpBackend::new(config).map(HttpTranslator)
    }
}

impl Translator for HttpTranslator {
    fn translate_text(
        &self,
        text: &str,
        src: LanguageCode,
        tgt: LanguageCode,
    ) -> Result<String, BackendError> {
        check_translate_input(src, tgt)?;
        let endpoint = self.0.endpoint("/translate");
        let config = &self.0.config;
        let body = json!({
            "model": config.model_name,
            "text": text,
            "src": config.backend_code(src),
            "tgt": config.backend_code(tgt),
        });
        let response = self.0.post_json("/translate", &body)?;
        let translated = response
            .get("translation")
            .or_else(|| response.get("text"))
            .and_then(Value::as_str)
            .ok_or_else(|| BackendError::protocol(&endpoint, "missing `translation`"))?;
        if translated.trim().is_empty() {
            return Err(BackendError::protocol(&endpoint, "empty translation"));
        }
        Ok(translated.to_string())
    }

    fn fingerprint(&self) -> String {
        self.0.fingerprint("translator")
    }
}

pub struct HttpChat(HttpBackend);

impl HttpChat {
    pub fn new(config: BackendConfig) -> Result<Self, BackendError> {
        HttpBackend::new(config).map(HttpChat)
    }
}

impl ChatBackend for HttpChat {
    fn chat_complete(&self, request: &ChatRequest) -> Result<String, BackendError> {
        request.validate()?;
        let endpoint = self.0.endpoint("/chat/completions");
        let body = json!({
            "model": self.0.config.model_name,
            "messages": [
                { "role": "system", "content": request.system },
                { "role": "user", "content": request.user },
            ],
            "temperature": request.temperature,
            "max_tokens": request.max_tokens,
            "stream": false,
        });
        let response = self.0.post_json("/chat/completions", &body)?;
        let content = response
            .pointer("/choices/0/message/content")
            .and_then(Value::as_str)
            .ok_or_else(|| BackendError::protocol(&endpoint, "missing choices[0].message.content"))?;
        if content.is_empty() {
            return Err(BackendError::protocol(&endpoint, "empty completion"));
        }
        Ok(content.to_string())
    }

    fn fingerprint(&self) -> String {
        self.0.fingerprint("chat")
    }
}
