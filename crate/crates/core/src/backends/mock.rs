//! Deterministic backends for tests, demos and CI.
//!
//! Every mock is a pure function of its inputs.

use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};

use unicode_normalization::UnicodeNormalization;

use super::{
    check_embed_input, check_translate_input, BackendError, ChatBackend, ChatRequest, Embedder,
    Reranker, Translator,
};
use crate::metrics::char_trigram_recall;
use crate::types::LanguageCode;

/// 64-bit FNV-1a. Stable across platforms and releases, unlike
/// `std::hash`.
pub fn stable_hash(bytes: &[u8]) -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    bytes
        .iter()
        .fold(OFFSET, |h, &b| (h ^ u64::from(b)).wrapping_mul(PRIME))
}

/// Hashes character n-grams (n = 1..=3) of the lowercased NFC text into
/// signed buckets, then normalizes. Lexically similar texts get similar
/// vectors, which keeps mock retrieval meaningful.
#[derive(Debug, Clone)]
pub struct HashEmbedder {
    dimension: usize,
}

impl HashEmbedder {
    pub fn new(dimension: usize) -> Self {
        assert!(dimension > 0, "embedding dimension must be positive");
        HashEmbedder { dimension }
    }

    pub fn embed_one(&self, text: &str) -> Vec<f64> {
        let chars: Vec<char> = text.nfc().flat_map(char::to_lowercase).collect();
        let mut v = vec![0.0f64; self.dimension];
        let mut buf = String::new();
        for n in 1..=3 {
            for window in chars.windows(n) {
                buf.clear();
                buf.extend(window);
                let h = stable_hash(buf.as_bytes()) ^ (n as u64);
                let bucket = (h % self.dimension as u64) as usize;
                let sign = if (h >> 63) == 0 { 1.0 } else { -1.0 };
                v[bucket] += sign * n as f64;
            }
        }
        if !crate::scalar::l2_normalize(&mut v) {
            // Only reachable when every bucket cancels out.
            v = vec![0.0; self.dimension];
            v[(stable_hash(text.as_bytes()) % self.dimension as u64) as usize] = 1.0;
        }
        v
    }
}

impl Default for HashEmbedder {
    fn default() -> Self {
        HashEmbedder::new(64)
    }
}

impl Embedder for HashEmbedder {
    fn embed_batch(&self, texts: &[String]) -> Result<Vec<Vec<f64>>, BackendError> {
        check_embed_input(texts)?;
        Ok(texts.iter().map(|t| self.embed_one(t)).collect())
    }

    fn fingerprint(&self) -> String {
        format!("mock-hash-embedder:dim={}", self.dimension)
    }
}

/// Scores each passage by the character-trigram recall of the query in
/// the passage.
#[derive(Debug, Clone, Default)]
pub struct TrigramReranker;

impl Reranker for TrigramReranker {
    fn rerank_pairs(&self, query: &str, passages: &[String]) -> Result<Vec<f64>, BackendError> {
        if passages.is_empty() {
            return Err(BackendError::Contract("rerank_pairs needs passages".into()));
        }
        passages
            .iter()
            .map(|p| {
                char_trigram_recall(query, p)
                    .map_err(|e| BackendError::Contract(format!("mock reranker: {e}")))
            })
            .collect()
    }

    fn fingerprint(&self) -> String {
        "mock-trigram-reranker".into()
    }
}

/// Prefixes the text with `⟦tgt⟧`; the content is otherwise unchanged.
#[derive(Debug, Clone, Default)]
pub struct MarkerTranslator;

impl MarkerTranslator {
    pub fn marker(tgt: LanguageCode) -> String {
        format!("⟦{tgt}⟧")
    }
}

impl Translator for MarkerTranslator {
    fn translate_text(
        &self,
        text: &str,
        src: LanguageCode,
        tgt: LanguageCode,
    ) -> Result<String, BackendError> {
        check_translate_input(src, tgt)?;
        Ok(format!("{}{text}", Self::marker(tgt)))
    }

    fn fingerprint(&self) -> String {
        "mock-marker-translator".into()
    }
}

/// Returns the first line of the user message.
#[derive(Debug, Clone, Default)]
pub struct EchoChat;

impl ChatBackend for EchoChat {
    fn chat_complete(&self, request: &ChatRequest) -> Result<String, BackendError> {
        request.validate()?;
        Ok(request.user.lines().next().unwrap_or_default().to_string())
    }

    fn fingerprint(&self) -> String {
        "mock-echo-chat".into()
    }
}

/// Canned answers keyed by the exact (system, user) pair.
#[derive(Debug, Clone, Default)]
pub struct ScriptedChat {
    responses: HashMap<(String, String), String>,
    default: Option<String>,
}

impl ScriptedChat {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_response(
        mut self,
        system: impl Into<String>,
        user: impl Into<String>,
        response: impl Into<String>,
    ) -> Self {
        self.responses
            .insert((system.into(), user.into()), response.into());
        self
    }

    /// Answer used for unknown keys; without one, unknown keys are errors.
    pub fn with_default(mut self, response: impl Into<String>) -> Self {
        self.default = Some(response.into());
        self
    }
}

impl ChatBackend for ScriptedChat {
    fn chat_complete(&self, request: &ChatRequest) -> Result<String, BackendError> {
        request.validate()?;
        self.responses
            .get(&(request.system.clone(), request.user.clone()))
            .or(self.default.as_ref())
            .cloned()
            .ok_or_else(|| {
                BackendError::protocol("mock-scripted-chat", "no scripted response for request")
            })
    }

    fn fingerprint(&self) -> String {
        "mock-scripted-chat".into()
    }
}

/// Wraps a backend and counts calls across threads.
#[derive(Debug, Default)]
pub struct Counting<T> {
    inner: T,
    calls: AtomicUsize,
}

impl<T> Counting<T> {
    pub fn new(inner: T) -> Self {
        Counting {
            inner,
            calls: AtomicUsize::new(0),
        }
    }

    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }

    fn tick(&self) {
        self.calls.fetch_add(1, Ordering::SeqCst);
    }
}

impl<T: Embedder> Embedder for Counting<T> {
    fn embed_batch(&self, texts: &[String]) -> Result<Vec<Vec<f64>>, BackendError> {
        self.tick();
        self.inner.embed_batch(texts)
    }

    fn fingerprint(&self) -> String {
        self.inner.fingerprint()
    }
}

impl<T: Reranker> Reranker for Counting<T> {
    fn rerank_pairs(&self, query: &str, passages: &[String]) -> Result<Vec<f64>, BackendError> {
        self.tick();
        self.inner.rerank_pairs(query, passages)
    }

    fn fingerprint(&self) -> String {
        self.inner.fingerprint()
    }
}

impl<T: Translator> Translator for Counting<T> {
    fn translate_text(
        &self,
        text: &str,
        src: LanguageCode,
        tgt: LanguageCode,
    ) -> Result<String, BackendError> {
        self.tick();
        self.inner.translate_text(text, src, tgt)
    }

    fn fingerprint(&self) -> String {
        self.inner.fingerprint()
    }
}

impl<T: ChatBackend> ChatBackend for Counting<T> {
    fn chat_complete(&self, request: &ChatRequest) -> Result<String, BackendError> {
        self.tick();
        self.inner.chat_complete(request)
    }

    fn fingerprint(&self) -> String {
        self.inner.fingerprint()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::l2_norm;

    fn strings(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn hash_is_stable() {
        // FNV-1a reference values.
        assert_eq!(stable_hash(b""), 0xcbf29ce484222325);
        assert_eq!(stable_hash(b"a"), 0xaf63dc4c8601ec8c);
    }

    #[test]
    fn embedder_contract() {
        let e = HashEmbedder::default();
        let out = e.embed_batch(&strings(&["aaa"])).unwrap();
        assert!((l2_norm(&out[0]) - 1.0).abs() < 1e-12);
        let twice = e.embed_batch(&strings(&["aaa", "aaa"])).unwrap();
        assert_eq!(twice[0], twice[1]);
        assert_eq!(twice[0], out[0]);
        let ab = e.embed_batch(&strings(&["a", "b"])).unwrap();
        assert_eq!(ab[0].len(), ab[1].len());
        assert!(e.embed_batch(&[]).is_err());
        assert!(e.embed_batch(&strings(&[""])).is_err());
    }

    #[test]
    fn reranker_contract() {
        let r = TrigramReranker;
        let scores = r
            .rerank_pairs("capital of france", &strings(&["xyz", "capital", "capital of france"]))
            .unwrap();
        assert_eq!(scores[0], 0.0);
        assert!(scores[1] > 0.0);
        assert_eq!(scores[2], 1.0);
        assert!(scores.iter().all(|&s| s <= scores[2]));
    }

    #[test]
    fn translator_contract() {
        let t = MarkerTranslator;
        let out = t
            .translate_text("hello", LanguageCode::EN, LanguageCode::KO)
            .unwrap();
        assert_eq!(out, "⟦ko⟧hello");
        for _ in 0..3 {
            assert_eq!(
                t.translate_text("hello", LanguageCode::EN, LanguageCode::KO)
                    .unwrap(),
                out
            );
        }
        assert!(matches!(
            t.translate_text("hello", LanguageCode::EN, LanguageCode::EN),
            Err(BackendError::Contract(_))
        ));
    }

    #[test]
    fn chat_mocks() {
        let echo = EchoChat;
        let req = ChatRequest::new("s", "first line\nsecond");
        assert_eq!(echo.chat_complete(&req).unwrap(), "first line");

        let scripted = ScriptedChat::new().with_response("s", "first line\nsecond", "canned");
        assert_eq!(scripted.chat_complete(&req).unwrap(), "canned");
        let other = ChatRequest::new("s", "other");
        assert!(scripted.chat_complete(&other).is_err());
        let with_default = scripted.with_default("fallback");
        assert_eq!(with_default.chat_complete(&other).unwrap(), "fallback");
    }

    #[test]
    fn counting_wrapper() {
        let c = Counting::new(EchoChat);
        c.chat_complete(&ChatRequest::new("s", "u")).unwrap();
        c.chat_complete(&ChatRequest::new("s", "u")).unwrap();
        assert_eq!(c.calls(), 2);
    }
}
