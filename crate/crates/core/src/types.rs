//! Domain values shared by every pipeline stage.
//!
//! All types here are immutable once constructed. Constructors validate
//! their invariants so that downstream stages can rely on them.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Violation of a domain-type invariant.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ValidationError {
    #[error("invalid language code {0:?}: expected two ASCII letters")]
    LanguageCode(String),
    #[error("query {id:?} has empty text")]
    EmptyQuery { id: String },
    #[error("passage {id:?} has empty text")]
    EmptyPassage { id: String },
    #[error("QA record {id:?} has no gold answers")]
    NoGoldAnswers { id: String },
    #[error("score {name} = {value} outside [0.0, 5.0]")]
    ScoreOutOfRange { name: &'static str, value: f64 },
    #[error("unknown pipeline mode {0:?} (expected base, cross, dkm, qtt or hard)")]
    UnknownMode(String),
    #[error("invalid ranking: {0}")]
    Ranking(String),
    #[error("context passage {id:?} violates {status} invariant: {detail}")]
    ContextInvariant {
        id: String,
        status: ContextStatus,
        detail: String,
    },
}

/// Two-letter ISO-639-1 language identifier, stored lowercase.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LanguageCode([u8; 2]);

impl LanguageCode {
    pub const EN: LanguageCode = LanguageCode(*b"en");
    pub const KO: LanguageCode = LanguageCode(*b"ko");
    pub const FI: LanguageCode = LanguageCode(*b"fi");
    pub const ZH: LanguageCode = LanguageCode(*b"zh");

    pub fn parse(code: &str) -> Result<Self, ValidationError> {
        validate_language(code)
    }

    pub fn as_str(&self) -> &str {
        // Only ASCII lowercase letters are ever stored.
        std::str::from_utf8(&self.0).expect("language code is ASCII")
    }
}

/// Normalizes `code` to a lowercase two-letter [`LanguageCode`].
pub fn validate_language(code: &str) -> Result<LanguageCode, ValidationError> {
    let bytes = code.as_bytes();
    if bytes.len() != 2 || !bytes.iter().all(u8::is_ascii_alphabetic) {
        return Err(ValidationError::LanguageCode(code.to_string()));
    }
    Ok(LanguageCode([
        bytes[0].to_ascii_lowercase(),
        bytes[1].to_ascii_lowercase(),
    ]))
}

impl FromStr for LanguageCode {
    type Err = ValidationError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        validate_language(s)
    }
}

impl fmt::Display for LanguageCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Debug for LanguageCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LanguageCode({})", self.as_str())
    }
}

impl Serialize for LanguageCode {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for LanguageCode {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = String::deserialize(deserializer)?;
        validate_language(&raw).map_err(serde::de::Error::custom)
    }
}

/// A user question in its query language.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Query {
    pub id: String,
    pub text: String,
    pub lang: LanguageCode,
}

impl Query {
    pub fn new(
        id: impl Into<String>,
        text: impl Into<String>,
        lang: LanguageCode,
    ) -> Result<Self, ValidationError> {
        let id = id.into();
        let text = text.into();
        if text.trim().is_empty() {
            return Err(ValidationError::EmptyQuery { id });
        }
        Ok(Query { id, text, lang })
    }
}

/// A knowledge-base text unit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Passage {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub title: Option<String>,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lang: Option<LanguageCode>,
}

impl Passage {
    pub fn new(
        id: impl Into<String>,
        text: impl Into<String>,
        lang: Option<LanguageCode>,
    ) -> Result<Self, ValidationError> {
        let id = id.into();
        let text = text.into();
        if text.trim().is_empty() {
            return Err(ValidationError::EmptyPassage { id });
        }
        Ok(Passage {
            id,
            title: None,
            text,
            lang,
        })
    }

    pub fn with_title(mut self, title: impl Into<String>) -> Self {
        self.title = Some(title.into());
        self
    }
}

/// A passage returned by retrieval, optionally rescored by the reranker.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetrievedPassage {
    pub passage: Passage,
    pub retrieval_score: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rerank_score: Option<f64>,
    pub rank: usize,
}

/// Checks that `ranked` carries ranks 1..n in order, and that rerank
/// scores (when present) are non-increasing with ties broken by ascending
/// passage id.
pub fn validate_ranking(ranked: &[RetrievedPassage]) -> Result<(), ValidationError> {
    for (i, item) in ranked.iter().enumerate() {
        if item.rank != i + 1 {
            return Err(ValidationError::Ranking(format!(
                "position {} carries rank {}",
                i + 1,
                item.rank
            )));
        }
    }
    let mut seen = std::collections::HashSet::new();
    for item in ranked {
        if !seen.insert(item.passage.id.as_str()) {
            return Err(ValidationError::Ranking(format!(
                "passage {:?} appears twice",
                item.passage.id
            )));
        }
    }
    for pair in ranked.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        match (a.rerank_score, b.rerank_score) {
            (Some(sa), Some(sb)) => {
                let ordered = sa > sb || (sa == sb && a.passage.id < b.passage.id);
                if !ordered {
                    return Err(ValidationError::Ranking(format!(
                        "rank {} ({:?}, {sa}) precedes rank {} ({:?}, {sb})",
                        a.rank, a.passage.id, b.rank, b.passage.id
                    )));
                }
            }
            (None, None) => {}
            _ => {
                return Err(ValidationError::Ranking(
                    "rerank scores present on only part of the set".into(),
                ))
            }
        }
    }
    Ok(())
}

/// The three judge criteria, each in [0.0, 5.0] at one-decimal precision.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QualityScores {
    pub semantic_equivalence: f64,
    pub grammatical_accuracy: f64,
    pub naturalness_fluency: f64,
}

pub const SCORE_MIN: f64 = 0.0;
pub const SCORE_MAX: f64 = 5.0;

pub(crate) fn quantize_tenth(value: f64) -> f64 {
    (value * 10.0).round() / 10.0
}

impl QualityScores {
    /// Validates the range and quantizes each score to one decimal.
    pub fn new(
        semantic_equivalence: f64,
        grammatical_accuracy: f64,
        naturalness_fluency: f64,
    ) -> Result<Self, ValidationError> {
        let check = |name: &'static str, value: f64| {
            if value.is_finite() && (SCORE_MIN..=SCORE_MAX).contains(&value) {
                Ok(quantize_tenth(value))
            } else {
                Err(ValidationError::ScoreOutOfRange { name, value })
            }
        };
        Ok(QualityScores {
            semantic_equivalence: check("semantic_equivalence", semantic_equivalence)?,
            grammatical_accuracy: check("grammatical_accuracy", grammatical_accuracy)?,
            naturalness_fluency: check("naturalness_fluency", naturalness_fluency)?,
        })
    }

    /// Scores in criterion order: semantic, grammatical, naturalness.
    pub fn as_array(&self) -> [f64; 3] {
        [
            self.semantic_equivalence,
            self.grammatical_accuracy,
            self.naturalness_fluency,
        ]
    }
}

/// Processing outcome of a context passage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContextStatus {
    /// Shown as written in the knowledge base.
    Original,
    /// Translated and followed by a quality tag.
    TranslatedTagged,
    /// Translated, no scoring requested.
    TranslatedUntagged,
    /// Translated, but the judge never produced usable scores.
    TranslatedUnscored,
    /// Rewritten by the passage-refinement model.
    Refined,
    /// Removed from the generator context.
    FilteredOut,
}

impl fmt::Display for ContextStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            ContextStatus::Original => "original",
            ContextStatus::TranslatedTagged => "translated_tagged",
            ContextStatus::TranslatedUntagged => "translated_untagged",
            ContextStatus::TranslatedUnscored => "translated_unscored",
            ContextStatus::Refined => "refined",
            ContextStatus::FilteredOut => "filtered_out",
        };
        f.write_str(name)
    }
}

/// A passage as it will (or would) appear in the generation prompt.
///
/// Fields are private; each status has its own constructor so the
/// status-conditioned invariants hold by construction. `translated_text`
/// is never modified once set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContextPassage {
    source: Passage,
    status: ContextStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    translated_text: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    scores: Option<QualityScores>,
    display_text: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    note: Option<String>,
}

impl ContextPassage {
    pub fn original(source: Passage) -> Self {
        let display_text = source.text.clone();
        ContextPassage {
            source,
            status: ContextStatus::Original,
            translated_text: None,
            scores: None,
            display_text,
            note: None,
        }
    }

    pub fn translated(source: Passage, translated_text: String) -> Self {
        ContextPassage {
            source,
            status: ContextStatus::TranslatedUntagged,
            display_text: translated_text.clone(),
            translated_text: Some(translated_text),
            scores: None,
            note: None,
        }
    }

    /// A passage dropped before any translation happened.
    pub fn dropped(source: Passage, reason: impl Into<String>) -> Self {
        ContextPassage {
            source,
            status: ContextStatus::FilteredOut,
            translated_text: None,
            scores: None,
            display_text: String::new(),
            note: Some(reason.into()),
        }
    }

    pub(crate) fn into_tagged(self, scores: QualityScores, display_text: String) -> Self {
        ContextPassage {
            status: ContextStatus::TranslatedTagged,
            scores: Some(scores),
            display_text,
            ..self
        }
    }

    pub(crate) fn into_unscored(self, reason: impl Into<String>) -> Self {
        let display_text = self.translated_text.clone().unwrap_or_default();
        ContextPassage {
            status: ContextStatus::TranslatedUnscored,
            scores: None,
            display_text,
            note: Some(reason.into()),
            ..self
        }
    }

    pub(crate) fn into_refined(self, rewritten: String) -> Self {
        ContextPassage {
            status: ContextStatus::Refined,
            display_text: rewritten,
            ..self
        }
    }

    pub(crate) fn into_filtered(self, reason: impl Into<String>) -> Self {
        ContextPassage {
            status: ContextStatus::FilteredOut,
            note: Some(reason.into()),
            ..self
        }
    }

    pub(crate) fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    pub fn source(&self) -> &Passage {
        &self.source
    }

    pub fn status(&self) -> ContextStatus {
        self.status
    }

    pub fn translated_text(&self) -> Option<&str> {
        self.translated_text.as_deref()
    }

    pub fn scores(&self) -> Option<&QualityScores> {
        self.scores.as_ref()
    }

    pub fn display_text(&self) -> &str {
        &self.display_text
    }

    /// Failure reason, truncation notice, or filter reason, if any.
    pub fn note(&self) -> Option<&str> {
        self.note.as_deref()
    }

    /// True when the passage reaches the generator.
    pub fn is_visible(&self) -> bool {
        self.status != ContextStatus::FilteredOut
    }

    /// True when the passage went through machine translation.
    pub fn is_translated(&self) -> bool {
        self.translated_text.is_some()
    }

    /// Checks the status-conditioned field invariants. Tagged passages are
    /// only checked for the prefix relation here; the exact tag rendering
    /// is checked by the quality module.
    pub fn check_invariants(&self) -> Result<(), ValidationError> {
        let fail = |detail: &str| {
            Err(ValidationError::ContextInvariant {
                id: self.source.id.clone(),
                status: self.status,
                detail: detail.to_string(),
            })
        };
        match self.status {
            ContextStatus::Original => {
                if self.translated_text.is_some() || self.scores.is_some() {
                    return fail("original carries translation or scores");
                }
                if self.display_text != self.source.text {
                    return fail("display text differs from source text");
                }
            }
            ContextStatus::TranslatedTagged => {
                let Some(translated) = &self.translated_text else {
                    return fail("missing translated text");
                };
                if self.scores.is_none() {
                    return fail("missing scores");
                }
                if !self.display_text.starts_with(translated.as_str())
                    || self.display_text.len() == translated.len()
                {
                    return fail("display text is not translation plus tag");
                }
            }
            ContextStatus::TranslatedUntagged | ContextStatus::TranslatedUnscored => {
                if self.scores.is_some() {
                    return fail("untagged passage carries scores");
                }
                if self.translated_text.as_deref() != Some(self.display_text.as_str()) {
                    return fail("display text differs from translated text");
                }
            }
            ContextStatus::Refined => {
                if self.scores.is_some() {
                    return fail("refined passage carries scores");
                }
            }
            ContextStatus::FilteredOut => {}
        }
        Ok(())
    }
}

/// A benchmark item.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QaRecord {
    pub id: String,
    pub question: String,
    pub lang: LanguageCode,
    pub gold_answers: Vec<String>,
}

impl QaRecord {
    pub fn new(
        id: impl Into<String>,
        question: impl Into<String>,
        lang: LanguageCode,
        gold_answers: Vec<String>,
    ) -> Result<Self, ValidationError> {
        let id = id.into();
        if gold_answers.is_empty() {
            return Err(ValidationError::NoGoldAnswers { id });
        }
        Ok(QaRecord {
            id,
            question: question.into(),
            lang,
            gold_answers,
        })
    }

    pub fn to_query(&self) -> Result<Query, ValidationError> {
        Query::new(self.id.clone(), self.question.clone(), self.lang)
    }
}

/// Pipeline variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PipelineMode {
    /// Retrieved passages as-is.
    Base,
    /// Foreign passages translated, untagged.
    Cross,
    /// Translated, then every passage rewritten by an LLM.
    Dkm,
    /// Translated, scored and quality-tagged.
    Qtt,
    /// As `Qtt`, then low-scoring translations removed.
    Hard,
}

impl PipelineMode {
    pub const ALL: [PipelineMode; 5] = [
        PipelineMode::Base,
        PipelineMode::Cross,
        PipelineMode::Dkm,
        PipelineMode::Qtt,
        PipelineMode::Hard,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            PipelineMode::Base => "base",
            PipelineMode::Cross => "cross",
            PipelineMode::Dkm => "dkm",
            PipelineMode::Qtt => "qtt",
            PipelineMode::Hard => "hard",
        }
    }

    /// Column heading used in rendered comparison tables.
    pub fn label(&self) -> &'static str {
        match self {
            PipelineMode::Base => "Base",
            PipelineMode::Cross => "Cross",
            PipelineMode::Dkm => "DKM",
            PipelineMode::Qtt => "QTT",
            PipelineMode::Hard => "Hard",
        }
    }

    pub fn translates(&self) -> bool {
        !matches!(self, PipelineMode::Base)
    }

    pub fn scores_translations(&self) -> bool {
        matches!(self, PipelineMode::Qtt | PipelineMode::Hard)
    }
}

impl FromStr for PipelineMode {
    type Err = ValidationError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PipelineMode::ALL
            .into_iter()
            .find(|m| m.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| ValidationError::UnknownMode(s.to_string()))
    }
}

impl fmt::Display for PipelineMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}
