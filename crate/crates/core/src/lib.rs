//! Multilingual retrieval-augmented generation with quality-tagged
//! translations.
//!
//! Cross-lingual evidence is translated into the query language, each
//! translation is scored by an LLM judge on three criteria, and the scores
//! are appended to the passage as a tag before generation. Answers are
//! evaluated with character 3-gram recall.
//!
//! ```no_run
//! use std::sync::Arc;
//! use qttrag::{Backends, Index, Pipeline, PipelineConfig, PipelineMode, PromptSet, Query, LanguageCode, Passage};
//!
//! let prompts = Arc::new(PromptSet::builtin());
//! let backends = Backends::mock(&prompts);
//! let kb = vec![Passage::new("p1", "Seoul is the capital of South Korea.", None).unwrap()];
//! let index = Index::build(kb, backends.embedder.as_ref(), 32).unwrap();
//! let pipeline = Pipeline::new(Arc::new(index), backends, prompts, PipelineConfig::default()).unwrap();
//! let query = Query::new("q1", "대한민국의 수도는?", LanguageCode::KO).unwrap();
//! let trace = pipeline.run_query(&query, PipelineMode::Qtt).unwrap();
//! println!("{}", trace.answer);
//! ```

pub mod backends;
pub mod data;
pub mod generate;
pub mod index;
pub mod langid;
pub mod metrics;
pub mod pipeline;
pub mod prompts;
pub mod quality;
pub mod scalar;
pub mod translate;
pub mod types;

pub use backends::{BackendConfig, BackendError, ChatBackend, ChatRequest, Embedder, Reranker, Translator};
pub use index::VectorIndex;
pub use metrics::{best_recall_over_golds, char_trigram_recall, cross_lingual_share, RunReport};
pub use pipeline::{Backends, Pipeline, PipelineConfig, PipelineError, PipelineTrace};
pub use prompts::PromptSet;
pub use quality::FilterRule;
pub use scalar::Scalar;
pub use types::{
    ContextPassage, ContextStatus, LanguageCode, Passage, PipelineMode, QaRecord, QualityScores,
    Query, RetrievedPassage, ValidationError,
};

/// Single-precision index, the default storage type.
pub type Index = VectorIndex<f32>;
/// Double-precision index.
pub type IndexF64 = VectorIndex<f64>;
/// Single-precision pipeline.
pub type QttPipeline = Pipeline<f32>;
