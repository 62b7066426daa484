//! Per-query orchestration of every pipeline mode, and benchmark runs.
//!
//! ```text
//! retrieve (top-k) → rerank (top-n) → detect/translate → [score + tag]
//!                  → [hard filter] → generation prompt → answer
//! ```
//!
//! Stage failures degrade per passage or per query; only configuration
//! problems (unknown query language, broken index) abort.

use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::backends::mock::{EchoChat, HashEmbedder, MarkerTranslator, TrigramReranker};
use crate::backends::{ChatBackend, ChatRequest, Embedder, Reranker, Translator};
use crate::generate::{build_generation_prompt, build_no_context_prompt, generate_answer, GenerationError};
use crate::index::{rerank, IndexError, VectorIndex, DEFAULT_TOP_K, DEFAULT_TOP_N};
use crate::langid::{DetectionResult, Detector, ScriptHeuristic};
use crate::metrics::{aggregate, best_recall_over_golds, EvalResult, MetricError, RunManifest, RunReport};
use crate::prompts::{fill, PromptError, PromptSet};
use crate::quality::{
    attach_tag, hard_filter, score_translation, FilterRule, MockJudge, ScoringOutcome, Verdict,
    DEFAULT_THRESHOLD,
};
use crate::scalar::Scalar;
use crate::translate::{translate_if_needed, TranslationOptions};
use crate::types::{
    ContextPassage, ContextStatus, PipelineMode, QaRecord, Query, RetrievedPassage,
};

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    Prompt(#[from] PromptError),
    #[error("retrieval failed: {0}")]
    Index(#[from] IndexError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error("invalid record {id:?}: {message}")]
    Record { id: String, message: String },
    #[error("pipeline configuration: {0}")]
    Config(String),
}

impl PipelineError {
    /// True when the failure came from a model service rather than from
    /// configuration or input data.
    pub fn is_backend(&self) -> bool {
        matches!(
            self,
            PipelineError::Index(IndexError::Backend(_) | IndexError::Embedding { .. })
        )
    }
}

fn default_top_k() -> usize {
    DEFAULT_TOP_K
}

fn default_top_n() -> usize {
    DEFAULT_TOP_N
}

fn default_threshold() -> f64 {
    DEFAULT_THRESHOLD
}

fn default_judge_retries() -> u32 {
    2
}

fn default_parallelism() -> usize {
    4
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    /// Dense retrieval depth.
    #[serde(default = "default_top_k")]
    pub top_k: usize,
    /// Passages kept after reranking.
    #[serde(default = "default_top_n")]
    pub top_n: usize,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    #[serde(default)]
    pub filter_rule: FilterRule,
    /// Extra judge attempts after an unusable answer.
    #[serde(default = "default_judge_retries")]
    pub judge_retries: u32,
    #[serde(default)]
    pub translation: TranslationOptions,
    /// Worker threads for queries and per-passage fan-out.
    #[serde(default = "default_parallelism")]
    pub parallelism: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            top_k: DEFAULT_TOP_K,
            top_n: DEFAULT_TOP_N,
            threshold: DEFAULT_THRESHOLD,
            filter_rule: FilterRule::AllBelow,
            judge_retries: default_judge_retries(),
            translation: TranslationOptions::default(),
            parallelism: default_parallelism(),
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<(), PipelineError> {
        if self.top_k == 0 || self.top_n == 0 {
            return Err(PipelineError::Config("top_k and top_n must be at least 1".into()));
        }
        if !(0.0..=5.0).contains(&self.threshold) {
            return Err(PipelineError::Config(format!(
                "threshold {} outside [0, 5]",
                self.threshold
            )));
        }
        if self.parallelism == 0 {
            return Err(PipelineError::Config("parallelism must be at least 1".into()));
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }
}

/// One handle per model role. The generator also performs the passage
/// rewrites of `dkm` mode.
#[derive(Clone)]
pub struct Backends {
    pub embedder: Arc<dyn Embedder>,
    pub reranker: Arc<dyn Reranker>,
    pub translator: Arc<dyn Translator>,
    pub judge: Arc<dyn ChatBackend>,
    pub generator: Arc<dyn ChatBackend>,
}

impl Backends {
    /// Deterministic stand-ins for every role.
    pub fn mock(prompts: &PromptSet) -> Self {
        Backends {
            embedder: Arc::new(HashEmbedder::default()),
            reranker: Arc::new(TrigramReranker),
            translator: Arc::new(MarkerTranslator),
            judge: Arc::new(MockJudge::new(prompts)),
            generator: Arc::new(EchoChat),
        }
    }

    pub fn fingerprints(&self) -> BTreeMap<String, String> {
        BTreeMap::from([
            ("embedder".to_string(), self.embedder.fingerprint()),
            ("reranker".to_string(), self.reranker.fingerprint()),
            ("translator".to_string(), self.translator.fingerprint()),
            ("judge".to_string(), self.judge.fingerprint()),
            ("generator".to_string(), self.generator.fingerprint()),
        ])
    }
}

/// What happened to one reranked passage.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PassageDecision {
    pub passage_id: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detection: Option<DetectionResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scoring: Option<ScoringOutcome>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rewrite_error: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct StageTimings {
    pub retrieve: Duration,
    pub rerank: Duration,
    pub translate: Duration,
    pub score: Duration,
    pub rewrite: Duration,
    pub generate: Duration,
}

/// Audit record for one query.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PipelineTrace {
    pub query: Query,
    pub mode: PipelineMode,
    pub retrieved: Vec<RetrievedPassage>,
    pub reranked: Vec<RetrievedPassage>,
    /// Aligned with `reranked`; filtered-out entries included.
    pub context: Vec<ContextPassage>,
    pub decisions: Vec<PassageDecision>,
    pub prompt: ChatRequest,
    /// Generator output, verbatim. Empty when generation failed.
    pub answer: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generation_error: Option<String>,
    pub timings: StageTimings,
    pub warnings: Vec<String>,
}

impl PipelineTrace {
    pub fn visible_context(&self) -> impl Iterator<Item = &ContextPassage> {
        self.context.iter().filter(|p| p.is_visible())
    }

    /// (translated, visible) passage counts.
    pub fn share_counts(&self) -> (usize, usize) {
        let visible: Vec<_> = self.visible_context().collect();
        let translated = visible.iter().filter(|p| p.is_translated()).count();
        (translated, visible.len())
    }

    pub fn failed(&self) -> bool {
        self.generation_error.is_some()
    }
}

/// A query that produced no trace.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QueryFailure {
    pub record_id: String,
    pub error: String,
    pub backend: bool,
}

pub type QueryOutcome = Result<PipelineTrace, QueryFailure>;

/// Report plus every per-query trace of a benchmark run.
#[derive(Debug)]
pub struct BenchmarkRun {
    pub report: RunReport,
    pub outcomes: Vec<QueryOutcome>,
}

pub struct Pipeline<S: Scalar> {
    index: Arc<VectorIndex<S>>,
    backends: Backends,
    prompts: Arc<PromptSet>,
    detector: Arc<dyn Detector>,
    config: PipelineConfig,
    pool: rayon::ThreadPool,
}

impl<S: Scalar> Pipeline<S> {
    pub fn new(
        index: Arc<VectorIndex<S>>,
        backends: Backends,
        prompts: Arc<PromptSet>,
        config: PipelineConfig,
    ) -> Result<Self, PipelineError> {
        config.validate()?;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.parallelism)
            .build()
            .map_err(|e| PipelineError::Config(format!("thread pool: {e}")))?;
        Ok(Pipeline {
            index,
            backends,
            prompts,
            detector: Arc::new(ScriptHeuristic::default()),
            config,
            pool,
        })
    }

    pub fn with_detector(mut self, detector: Arc<dyn Detector>) -> Self {
        self.detector = detector;
        self
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.config
    }

    pub fn backends(&self) -> &Backends {
        &self.backends
    }

    pub fn run_query(&self, query: &Query, mode: PipelineMode) -> Result<PipelineTrace, PipelineError> {
        self.pool.install(|| self.run_query_inner(query, mode))
    }

    fn run_query_inner(&self, query: &Query, mode: PipelineMode) -> Result<PipelineTrace, PipelineError> {
        self.prompts.get(query.lang)?;
        let mut timings = StageTimings::default();
        let mut warnings = Vec::new();

        let started = Instant::now();
        let retrieved = self
            .index
            .retrieve(query, self.config.top_k, self.backends.embedder.as_ref())?;
        timings.retrieve = started.elapsed();

        let started = Instant::now();
        let reranked = rerank(
            query,
            &retrieved,
            self.config.top_n,
            self.backends.reranker.as_ref(),
        )?;
        timings.rerank = started.elapsed();

        let mut decisions: Vec<PassageDecision> = reranked
            .iter()
            .map(|r| PassageDecision {
                passage_id: r.passage.id.clone(),
                detection: None,
                scoring: None,
                rewrite_error: None,
            })
            .collect();

        let started = Instant::now();
        let mut context: Vec<ContextPassage> = if mode.translates() {
            let steps: Vec<_> = reranked
                .par_iter()
                .map(|r| {
                    translate_if_needed(
                        r,
                        query.lang,
                        self.detector.as_ref(),
                        self.backends.translator.as_ref(),
                        self.config.translation,
                    )
                })
                .collect();
            steps
                .into_iter()
                .zip(decisions.iter_mut())
                .map(|(step, decision)| {
                    decision.detection = step.detection;
                    warnings.extend(step.warnings);
                    step.context
                })
                .collect()
        } else {
            reranked
                .iter()
                .map(|r| ContextPassage::original(r.passage.clone()))
                .collect()
        };
        timings.translate = started.elapsed();

        match mode {
            PipelineMode::Base | PipelineMode::Cross => {}
            PipelineMode::Dkm => {
                let started = Instant::now();
                context = self.rewrite_all(query, context, &mut decisions, &mut warnings)?;
                timings.rewrite = started.elapsed();
            }
            PipelineMode::Qtt | PipelineMode::Hard => {
                let started = Instant::now();
                context = self.score_all(query, context, &mut decisions, &mut warnings)?;
                timings.score = started.elapsed();
                if mode == PipelineMode::Hard {
                    context = hard_filter(context, self.config.threshold, self.config.filter_rule);
                }
            }
        }
        debug_assert!(context.iter().all(|c| c.check_invariants().is_ok()));

        let prompt = match build_generation_prompt(query, &context, mode, &self.prompts) {
            Ok(p) => p,
            Err(GenerationError::EmptyContext) => {
                warnings.push("context is empty; generating without background".into());
                build_no_context_prompt(query, mode, &self.prompts).map_err(|e| match e {
                    GenerationError::Prompt(p) => PipelineError::Prompt(p),
                    other => PipelineError::Config(other.to_string()),
                })?
            }
            Err(GenerationError::Prompt(p)) => return Err(p.into()),
        };

        let started = Instant::now();
        let (answer, generation_error) =
            match generate_answer(&prompt, self.backends.generator.as_ref()) {
                Ok(answer) => (answer, None),
                Err(e) => {
                    warnings.push(format!("generation failed: {e}"));
                    (String::new(), Some(e.to_string()))
                }
            };
        timings.generate = started.elapsed();

        Ok(PipelineTrace {
            query: query.clone(),
            mode,
            retrieved,
            reranked,
            context,
            decisions,
            prompt,
            answer,
            generation_error,
            timings,
            warnings,
        })
    }

    fn score_all(
        &self,
        query: &Query,
        context: Vec<ContextPassage>,
        decisions: &mut [PassageDecision],
        warnings: &mut Vec<String>,
    ) -> Result<Vec<ContextPassage>, PipelineError> {
        let outcomes: Vec<Option<ScoringOutcome>> = context
            .par_iter()
            .map(|cp| {
                if cp.status() != ContextStatus::TranslatedUntagged {
                    return Ok(None);
                }
                let translated = cp.translated_text().expect("translated passage");
                score_translation(
                    &cp.source().text,
                    translated,
                    query.lang,
                    &self.prompts,
                    self.backends.judge.as_ref(),
                    self.config.judge_retries,
                )
                .map(Some)
            })
            .collect::<Result<_, _>>()
            .map_err(|e| PipelineError::Config(e.to_string()))?;

        let mut out = Vec::with_capacity(context.len());
        for ((cp, outcome), decision) in context.into_iter().zip(outcomes).zip(decisions.iter_mut()) {
            let next = match &outcome {
                None => cp,
                Some(ScoringOutcome {
                    verdict: Verdict::Scored { scores },
                    ..
                }) => attach_tag(cp, *scores, query.lang, &self.prompts)
                    .map_err(|e| PipelineError::Config(e.to_string()))?,
                Some(ScoringOutcome {
                    verdict: Verdict::Unscored { reason },
                    ..
                }) => {
                    warnings.push(format!("passage {:?} left unscored: {reason}", cp.source().id));
                    cp.into_unscored(reason.clone())
                }
            };
            decision.scoring = outcome;
            out.push(next);
        }
        Ok(out)
    }

    fn rewrite_all(
        &self,
        query: &Query,
        context: Vec<ContextPassage>,
        decisions: &mut [PassageDecision],
        warnings: &mut Vec<String>,
    ) -> Result<Vec<ContextPassage>, PipelineError> {
        let resources = self.prompts.get(query.lang)?;
        let rewrites: Vec<Option<Result<String, String>>> = context
            .par_iter()
            .map(|cp| {
                if !cp.is_visible() {
                    return None;
                }
                let user = fill(
                    &resources.dkm_user_template,
                    &[("passage", cp.display_text()), ("question", &query.text)],
                );
                let request = ChatRequest::new(resources.dkm_system.clone(), user);
                Some(
                    self.backends
                        .generator
                        .chat_complete(&request)
                        .map_err(|e| e.to_string())
                        .and_then(|text| {
                            if text.trim().is_empty() {
                                Err("rewrite was empty".to_string())
                            } else {
                                Ok(text)
                            }
                        }),
                )
            })
            .collect();
        Ok(context
            .into_iter()
            .zip(rewrites)
            .zip(decisions.iter_mut())
            .map(|((cp, rewrite), decision)| match rewrite {
                None => cp,
                Some(Ok(text)) => cp.into_refined(text),
                Some(Err(e)) => {
                    warnings.push(format!(
                        "passage {:?} kept unrewritten: {e}",
                        cp.source().id
                    ));
                    decision.rewrite_error = Some(e);
                    cp
                }
            })
            .collect())
    }

    /// Runs every record, scores answers, and aggregates. Per-query
    /// failures yield recall 0 with the failure flag set.
    pub fn run_benchmark(
        &self,
        records: &[QaRecord],
        mode: PipelineMode,
        label: &str,
    ) -> Result<BenchmarkRun, PipelineError> {
        if records.is_empty() {
            return Err(MetricError::EmptyResults.into());
        }
        for record in records {
            self.prompts.get(record.lang)?;
        }
        let outcomes: Vec<QueryOutcome> = self.pool.install(|| {
            records
                .par_iter()
                .map(|record| {
                    let query = record.to_query().map_err(|e| QueryFailure {
                        record_id: record.id.clone(),
                        error: e.to_string(),
                        backend: false,
                    })?;
                    self.run_query_inner(&query, mode).map_err(|e| QueryFailure {
                        record_id: record.id.clone(),
                        backend: e.is_backend(),
                        error: e.to_string(),
                    })
                })
                .collect()
        });

        let mut results = Vec::with_capacity(records.len());
        let (mut translated, mut input) = (0, 0);
        for (record, outcome) in records.iter().zip(&outcomes) {
            let failed = EvalResult {
                record_id: record.id.clone(),
                recall: 0.0,
                best_gold_index: 0,
                failed: true,
            };
            let result = match outcome {
                Ok(trace) => {
                    let (t, n) = trace.share_counts();
                    translated += t;
                    input += n;
                    if trace.failed() {
                        failed
                    } else {
                        match best_recall_over_golds(&record.gold_answers, trace.answer.trim()) {
                            Ok((recall, best_gold_index)) => EvalResult {
                                record_id: record.id.clone(),
                                recall,
                                best_gold_index,
                                failed: false,
                            },
                            Err(_) => failed,
                        }
                    }
                }
                Err(_) => failed,
            };
            results.push(result);
        }

        let mut fingerprints = self.backends.fingerprints();
        fingerprints.insert("index".into(), self.index.embedder_fingerprint().to_string());
        let manifest = RunManifest {
            label: label.to_string(),
            config_hash: self.config.hash(),
            dataset_hash: dataset_hash(records),
            backend_fingerprints: fingerprints,
        };
        let report = aggregate(results, mode, translated, input)?.with_manifest(manifest);
        Ok(BenchmarkRun { report, outcomes })
    }
}

/// SHA-256 over the records' canonical JSON lines.
pub fn dataset_hash(records: &[QaRecord]) -> String {
    let mut hasher = Sha256::new();
    for record in records {
        hasher.update(serde_json::to_vec(record).expect("record serializes"));
        hasher.update(b"\n");
    }
    hex::encode(hasher.finalize())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backends::mock::Counting;
    use crate::quality::strip_tag;
    use crate::types::{LanguageCode, Passage};

    fn corpus() -> Vec<Passage> {
        vec![
            Passage::new("ko-1", "서울은 대한민국의 수도이다.", Some(LanguageCode::KO)).unwrap(),
            Passage::new("ko-2", "부산은 대한민국의 항구 도시이다.", Some(LanguageCode::KO)).unwrap(),
            Passage::new("en-1", "Seoul is the capital of South Korea.", Some(LanguageCode::EN)).unwrap(),
            Passage::new("en-2", "Busan is a port city in South Korea.", None).unwrap(),
            Passage::new("fi-1", "Helsinki on Suomen pääkaupunki.", Some(LanguageCode::FI)).unwrap(),
            Passage::new("zh-1", "首尔是韩国的首都。", None).unwrap(),
        ]
    }

    fn pipeline_with(backends: Backends) -> Pipeline<f64> {
        let prompts = Arc::new(PromptSet::builtin());
        let index = VectorIndex::build(corpus(), backends.embedder.as_ref(), 4).unwrap();
        Pipeline::new(Arc::new(index), backends, prompts, PipelineConfig::default()).unwrap()
    }

    fn ko_query() -> Query {
        Query::new("q", "대한민국의 수도는?", LanguageCode::KO).unwrap()
    }

    #[test]
    fn base_mode_is_passthrough_without_model_calls() {
        let prompts = PromptSet::builtin();
        let translator = Arc::new(Counting::new(MarkerTranslator));
        let judge = Arc::new(Counting::new(MockJudge::new(&prompts)));
        let backends = Backends {
            translator: translator.clone(),
            judge: judge.clone(),
            ..Backends::mock(&prompts)
        };
        let p = pipeline_with(backends);
        let trace = p.run_query(&ko_query(), PipelineMode::Base).unwrap();
        assert_eq!(trace.reranked.len(), 5);
        for (cp, r) in trace.context.iter().zip(&trace.reranked) {
            assert_eq!(cp.status(), ContextStatus::Original);
            assert_eq!(cp.display_text(), r.passage.text);
        }
        assert_eq!(translator.calls(), 0);
        assert_eq!(judge.calls(), 0);
        assert!(trace.decisions.iter().all(|d| d.detection.is_none()));
    }

    #[test]
    fn qtt_tags_foreign_and_keeps_originals() {
        let p = pipeline_with(Backends::mock(&PromptSet::builtin()));
        let trace = p.run_query(&ko_query(), PipelineMode::Qtt).unwrap();
        let prompts = PromptSet::builtin();
        for cp in &trace.context {
            match cp.source().lang {
                Some(LanguageCode::KO) => {
                    assert_eq!(cp.status(), ContextStatus::Original);
                    assert_eq!(cp.display_text(), cp.source().text);
                }
                _ => {
                    assert_eq!(cp.status(), ContextStatus::TranslatedTagged, "{cp:?}");
                    assert!(cp.display_text().starts_with("⟦ko⟧"));
                    assert!(cp.display_text().contains(" [점수] "));
                    assert_eq!(
                        strip_tag(cp.display_text(), LanguageCode::KO, &prompts).unwrap(),
                        cp.translated_text().unwrap()
                    );
                }
            }
        }
        assert!(trace.prompt.system.contains("점수"));
        assert!(trace.answer.starts_with("Background: "));
    }

    #[test]
    fn hard_mode_filters_low_scores() {
        // Judge that hates the Seoul passage and likes everything else.
        struct Picky;
        impl ChatBackend for Picky {
            fn chat_complete(
                &self,
                request: &ChatRequest,
            ) -> Result<String, crate::backends::BackendError> {
                let v = if request.user.contains("Seoul") { 1.0 } else { 4.0 };
                Ok(format!(
                    r#"{{"의미론적 일치성": {v}, "문법적 정확성": {v}, "자연스러움과 유창성": {v}}}"#
                ))
            }
            fn fingerprint(&self) -> String {
                "picky".into()
            }
        }
        let backends = Backends {
            judge: Arc::new(Picky),
            ..Backends::mock(&PromptSet::builtin())
        };
        let p = pipeline_with(backends);
        let trace = p.run_query(&ko_query(), PipelineMode::Hard).unwrap();
        let seoul = trace
            .context
            .iter()
            .find(|c| c.source().id == "en-1")
            .expect("en-1 reranked into the top 5");
        assert_eq!(seoul.status(), ContextStatus::FilteredOut);
        assert_eq!(seoul.scores().unwrap().as_array(), [1.0; 3]);
        assert!(!trace.prompt.user.contains("Seoul is the capital"));
        let kept = trace.visible_context().count();
        assert_eq!(kept, trace.context.len() - 1);
    }

    #[test]
    fn dkm_rewrites_every_passage() {
        let p = pipeline_with(Backends::mock(&PromptSet::builtin()));
        let trace = p.run_query(&ko_query(), PipelineMode::Dkm).unwrap();
        for cp in trace.visible_context() {
            assert_eq!(cp.status(), ContextStatus::Refined);
        }
        // Echo rewrite returns the first line of the passage.
        let ko = trace.context.iter().find(|c| c.source().id == "ko-1").unwrap();
        assert_eq!(ko.display_text(), "서울은 대한민국의 수도이다.");
        assert!(ko.translated_text().is_none());
        assert!(!trace.prompt.system.contains("점수"));
    }

    #[test]
    fn generator_failure_is_recorded() {
        let backends = Backends {
            generator: Arc::new(crate::backends::mock::ScriptedChat::new()),
            ..Backends::mock(&PromptSet::builtin())
        };
        let p = pipeline_with(backends);
        let trace = p.run_query(&ko_query(), PipelineMode::Cross).unwrap();
        assert!(trace.failed());
        assert!(trace.answer.is_empty());
    }

    #[test]
    fn unknown_query_language_aborts() {
        let p = pipeline_with(Backends::mock(&PromptSet::builtin()));
        let q = Query::new("q", "what?", LanguageCode::EN).unwrap();
        assert!(matches!(
            p.run_query(&q, PipelineMode::Qtt),
            Err(PipelineError::Prompt(_))
        ));
    }

    #[test]
    fn benchmark_counts_cross_lingual_share() {
        let p = pipeline_with(Backends::mock(&PromptSet::builtin()));
        let records = vec![
            QaRecord::new("r1", "대한민국의 수도는?", LanguageCode::KO, vec!["서울".into()]).unwrap(),
            QaRecord::new("r2", "부산은?", LanguageCode::KO, vec!["항구".into()]).unwrap(),
        ];
        let run = p.run_benchmark(&records, PipelineMode::Cross, "test").unwrap();
        let (mut t, mut n) = (0, 0);
        for trace in run.outcomes.iter().map(|o| o.as_ref().unwrap()) {
            for cp in trace.visible_context() {
                n += 1;
                if cp.is_translated() {
                    t += 1;
                }
            }
        }
        assert_eq!((run.report.n_translated, run.report.n_input), (t, n));
        assert!((run.report.cross_lingual_share_pct - 100.0 * t as f64 / n as f64).abs() < 1e-9);
        assert_eq!(run.report.manifest.label, "test");
        assert_eq!(run.report.manifest.backend_fingerprints.len(), 6);
    }

    #[test]
    fn config_defaults_and_validation() {
        let c: PipelineConfig = serde_json::from_str("{}").unwrap();
        assert_eq!(c, PipelineConfig::default());
        assert_eq!((c.top_k, c.top_n, c.threshold), (50, 5, 3.5));
        let bad = PipelineConfig {
            threshold: 6.0,
            ..PipelineConfig::default()
        };
        assert!(bad.validate().is_err());
        assert_eq!(c.hash(), PipelineConfig::default().hash());
    }
}
