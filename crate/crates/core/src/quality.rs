//! LLM-judge scoring of translations and quality tags.
//!
//! A translated passage is scored on three criteria by a chat model using
//! a localized assessment prompt. The scores are appended to the
//! translation as a tag such as
//!
//! ```text
//!  [점수] 의미론적 일치성: 2.5, 문법적 정확성: 2.0, 자연스러움과 유창성: 2.3
//! ```
//!
//! leaving the translation itself untouched.

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::backends::mock::stable_hash;
use crate::backends::{BackendError, ChatBackend, ChatRequest};
use crate::prompts::{fill, PromptError, PromptSet};
use crate::types::{ContextPassage, ContextStatus, LanguageCode, QualityScores, SCORE_MAX, SCORE_MIN};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ScoreParseError {
    #[error("no JSON object found in judge output")]
    NoJson,
    #[error("judge output lacks the {0:?} score")]
    MissingKey(String),
    #[error("score {key:?} is not a number: {value}")]
    NotANumber { key: String, value: String },
    #[error("score {key:?} = {value} outside [0.0, 5.0]")]
    OutOfRange { key: String, value: f64 },
    #[error("malformed quality tag: {0}")]
    Tag(String),
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum QualityError {
    #[error(transparent)]
    Prompt(#[from] PromptError),
    #[error(transparent)]
    Parse(#[from] ScoreParseError),
    #[error("contract violation: {0}")]
    Contract(String),
}

/// System message sent with every assessment prompt.
pub const JUDGE_SYSTEM: &str = "Respond strictly in JSON format, without additional explanations.";

pub const DEFAULT_THRESHOLD: f64 = 3.5;

pub fn build_assessment_prompt(
    original: &str,
    translated: &str,
    lang: LanguageCode,
    prompts: &PromptSet,
) -> Result<String, QualityError> {
    let resources = prompts.get(lang)?;
    Ok(fill(
        &resources.assessment_template,
        &[("original", original), ("translated", translated)],
    ))
}

/// Extracts the first balanced `{...}` in `raw` that parses as a JSON
/// object. String literals are respected when matching braces.
pub fn first_json_object(raw: &str) -> Option<Map<String, Value>> {
    let bytes = raw.as_bytes();
    let mut start = 0;
    while let Some(offset) = raw[start..].find('{') {
        let open = start + offset;
        let mut depth = 0usize;
        let mut in_string = false;
        let mut escaped = false;
        let mut close = None;
        for (i, &b) in bytes.iter().enumerate().skip(open) {
            if in_string {
                match b {
                    _ if escaped => escaped = false,
                    b'\\' => escaped = true,
                    b'"' => in_string = false,
                    _ => {}
                }
                continue;
            }
            match b {
                b'"' => in_string = true,
                b'{' => depth += 1,
                b'}' => {
                    depth -= 1;
                    if depth == 0 {
                        close = Some(i);
                        break;
                    }
                }
                _ => {}
            }
        }
        let close = close?;
        if let Ok(Value::Object(map)) = serde_json::from_str(&raw[open..=close]) {
            return Some(map);
        }
        start = open + 1;
    }
    None
}

fn score_value(key: &str, value: &Value) -> Result<f64, ScoreParseError> {
    let number = match value {
        Value::Number(n) => n.as_f64(),
        Value::String(s) => s.trim().parse::<f64>().ok(),
        _ => None,
    }
    .filter(|v| v.is_finite())
    .ok_or_else(|| ScoreParseError::NotANumber {
        key: key.to_string(),
        value: value.to_string(),
    })?;
    if !(SCORE_MIN..=SCORE_MAX).contains(&number) {
        return Err(ScoreParseError::OutOfRange {
            key: key.to_string(),
            value: number,
        });
    }
    Ok(number)
}

/// Reads the three localized scores from a judge completion.
///
/// Prose around the JSON object is ignored. Values must lie in
/// [0.0, 5.0] and are quantized to one decimal; nothing is clamped.
pub fn parse_scores(
    raw: &str,
    lang: LanguageCode,
    prompts: &PromptSet,
) -> Result<QualityScores, QualityError> {
    let resources = prompts.get(lang)?;
    let object = first_json_object(raw).ok_or(ScoreParseError::NoJson)?;
    let mut values = [0.0; 3];
    for (slot, key) in values.iter_mut().zip(&resources.criteria) {
        let value = object
            .get(key)
            .ok_or_else(|| ScoreParseError::MissingKey(key.clone()))?;
        *slot = score_value(key, value)?;
    }
    Ok(QualityScores::new(values[0], values[1], values[2])
        .expect("scores were range-checked"))
}

/// Judge verdict for one translation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    Scored { scores: QualityScores },
    Unscored { reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoringOutcome {
    #[serde(flatten)]
    pub verdict: Verdict,
    pub attempts: u32,
}

impl ScoringOutcome {
    pub fn scores(&self) -> Option<&QualityScores> {
        match &self.verdict {
            Verdict::Scored { scores } => Some(scores),
            Verdict::Unscored { .. } => None,
        }
    }
}

/// Asks the judge to score `translated` against `original`.
///
/// Backend failures and unparseable or out-of-range completions are
/// retried with the identical prompt up to `max_retries` times. After that
/// the result is an unscored verdict, never a made-up score.
pub fn score_translation(
    original: &str,
    translated: &str,
    lang: LanguageCode,
    prompts: &PromptSet,
    judge: &dyn ChatBackend,
    max_retries: u32,
) -> Result<ScoringOutcome, QualityError> {
    if translated.trim().is_empty() {
        return Err(QualityError::Contract("cannot score an empty translation".into()));
    }
    let request = ChatRequest::new(
        JUDGE_SYSTEM,
        build_assessment_prompt(original, translated, lang, prompts)?,
    );
    let mut attempts = 0;
    let mut last_failure = String::new();
    while attempts <= max_retries {
        attempts += 1;
        let raw = match judge.chat_complete(&request) {
            Ok(raw) => raw,
            Err(e) => {
                log::debug!("judge attempt {attempts} failed: {e}");
                last_failure = format!("judge backend failed: {e}");
                continue;
            }
        };
        match parse_scores(&raw, lang, prompts) {
            Ok(scores) => {
                return Ok(ScoringOutcome {
                    verdict: Verdict::Scored { scores },
                    attempts,
                })
            }
            Err(QualityError::Parse(e)) => {
                log::debug!("judge attempt {attempts} unusable: {e}");
                last_failure = e.to_string();
            }
            Err(other) => return Err(other),
        }
    }
    Ok(ScoringOutcome {
        verdict: Verdict::Unscored {
            reason: format!("no usable judge output after {attempts} attempt(s): {last_failure}"),
        },
        attempts,
    })
}

/// ` <header> <k1>: v1, <k2>: v2, <k3>: v3`, one decimal per value.
pub fn render_tag(
    scores: &QualityScores,
    lang: LanguageCode,
    prompts: &PromptSet,
) -> Result<String, QualityError> {
    let r = prompts.get(lang)?;
    let values = scores.as_array();
    let pairs: Vec<String> = r
        .criteria
        .iter()
        .zip(values)
        .map(|(k, v)| format!("{k}: {v:.1}"))
        .collect();
    Ok(format!(" {} {}", r.tag_header, pairs.join(", ")))
}

fn tag_marker(lang: LanguageCode, prompts: &PromptSet) -> Result<String, QualityError> {
    Ok(format!(" {} ", prompts.get(lang)?.tag_header))
}

/// Splits `display` into (translation, tag) at the last tag header.
pub fn split_tag<'a>(
    display: &'a str,
    lang: LanguageCode,
    prompts: &PromptSet,
) -> Result<Option<(&'a str, &'a str)>, QualityError> {
    let marker = tag_marker(lang, prompts)?;
    Ok(display.rfind(&marker).map(|at| display.split_at(at)))
}

/// `display` without its quality tag; unchanged when it has none.
pub fn strip_tag<'a>(
    display: &'a str,
    lang: LanguageCode,
    prompts: &PromptSet,
) -> Result<&'a str, QualityError> {
    Ok(split_tag(display, lang, prompts)?.map_or(display, |(body, _)| body))
}

/// Inverse of [`render_tag`].
pub fn parse_tag(
    tag: &str,
    lang: LanguageCode,
    prompts: &PromptSet,
) -> Result<QualityScores, QualityError> {
    let r = prompts.get(lang)?;
    let bad = |why: &str| QualityError::Parse(ScoreParseError::Tag(why.to_string()));
    let mut rest = tag
        .strip_prefix(&tag_marker(lang, prompts)?)
        .ok_or_else(|| bad("missing header"))?;
    let mut values = [0.0; 3];
    for (i, key) in r.criteria.iter().enumerate() {
        if i > 0 {
            rest = rest.strip_prefix(", ").ok_or_else(|| bad("missing separator"))?;
        }
        rest = rest
            .strip_prefix(key.as_str())
            .and_then(|s| s.strip_prefix(": "))
            .ok_or_else(|| bad(&format!("missing key {key:?}")))?;
        let end = if i == 2 {
            rest.len()
        } else {
            rest.find(", ").ok_or_else(|| bad("missing separator"))?
        };
        values[i] = score_value(key, &Value::String(rest[..end].to_string()))?;
        rest = &rest[end..];
    }
    Ok(QualityScores::new(values[0], values[1], values[2]).expect("range-checked"))
}

/// Appends the rendered tag to a translated passage.
pub fn attach_tag(
    passage: ContextPassage,
    scores: QualityScores,
    lang: LanguageCode,
    prompts: &PromptSet,
) -> Result<ContextPassage, QualityError> {
    match passage.status() {
        ContextStatus::TranslatedUntagged
        | ContextStatus::TranslatedUnscored
        | ContextStatus::TranslatedTagged => {}
        other => {
            return Err(QualityError::Contract(format!(
                "quality tags apply only to translated passages, not {other} ({:?})",
                passage.source().id
            )))
        }
    }
    let translated = passage
        .translated_text()
        .ok_or_else(|| QualityError::Contract("passage has no translated text".into()))?;
    let display = format!("{translated}{}", render_tag(&scores, lang, prompts)?);
    Ok(passage.into_tagged(scores, display))
}

/// How the per-criterion comparisons combine in [`hard_filter`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FilterRule {
    /// Exclude when every criterion is strictly below the threshold.
    #[default]
    AllBelow,
    /// Exclude when any criterion is strictly below the threshold.
    AnyBelow,
}

impl std::str::FromStr for FilterRule {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "all-below" => Ok(FilterRule::AllBelow),
            "any-below" => Ok(FilterRule::AnyBelow),
            other => Err(format!(
                "unknown filter rule {other:?} (expected all-below or any-below)"
            )),
        }
    }
}

impl FilterRule {
    pub fn excludes(&self, scores: &QualityScores, threshold: f64) -> bool {
        let below = scores.as_array().map(|s| s < threshold);
        match self {
            FilterRule::AllBelow => below.iter().all(|&b| b),
            FilterRule::AnyBelow => below.iter().any(|&b| b),
        }
    }
}

/// Marks scored passages that fail the threshold as filtered out.
///
/// Originals and unscored passages are always kept. The returned list has
/// the same length and order as the input; excluded entries carry
/// [`ContextStatus::FilteredOut`] so they stay visible in traces.
pub fn hard_filter(
    passages: Vec<ContextPassage>,
    threshold: f64,
    rule: FilterRule,
) -> Vec<ContextPassage> {
    passages
        .into_iter()
        .map(|p| {
            let exclude = p.status() == ContextStatus::TranslatedTagged
                && p.scores().is_some_and(|s| rule.excludes(s, threshold));
            if exclude {
                p.into_filtered(format!("quality scores below {threshold:.1}"))
            } else {
                p
            }
        })
        .collect()
}

/// Deterministic judge for demos and tests.
///
/// Scores are derived from a hash of the prompt. The reply carries the
/// criterion keys of every registered language, so it parses for any
/// query language.
#[derive(Debug, Clone)]
pub struct MockJudge {
    key_sets: Vec<[String; 3]>,
}

impl MockJudge {
    pub fn new(prompts: &PromptSet) -> Self {
        let mut key_sets: Vec<[String; 3]> = prompts.all().map(|r| r.criteria.clone()).collect();
        key_sets.dedup();
        MockJudge { key_sets }
    }

    pub fn scores_for(prompt: &str) -> QualityScores {
        let h = stable_hash(prompt.as_bytes());
        let tenth = |shift: u32| ((h >> shift) & 0xffff) as f64 % 51.0 / 10.0;
        QualityScores::new(tenth(0), tenth(16), tenth(32)).expect("tenths within range")
    }
}

impl ChatBackend for MockJudge {
    fn chat_complete(&self, request: &ChatRequest) -> Result<String, BackendError> {
        request.validate()?;
        let scores = Self::scores_for(&request.user).as_array();
        let mut object = Map::new();
        for keys in &self.key_sets {
            for (key, value) in keys.iter().zip(scores) {
                object.insert(key.clone(), Value::from(value));
            }
        }
        Ok(Value::Object(object).to_string())
    }

    fn fingerprint(&self) -> String {
        "mock-hash-judge".into()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backends::mock::ScriptedChat;
    use crate::types::Passage;

    fn prompts() -> PromptSet {
        PromptSet::builtin()
    }

    #[test]
    fn korean_assessment_prompt() {
        let p = build_assessment_prompt("orig", "trans", LanguageCode::KO, &prompts()).unwrap();
        assert!(p.contains("영어 원문: orig"));
        assert!(p.contains("한국어 번역문: trans"));
    }

    #[test]
    fn finnish_assessment_prompt() {
        let p = build_assessment_prompt("orig", "trans", LanguageCode::FI, &prompts()).unwrap();
        assert!(p.contains("Alkuperäinen teksti (englanti):"));
    }

    #[test]
    fn unregistered_language() {
        let xx = LanguageCode::parse("xx").unwrap();
        assert!(matches!(
            build_assessment_prompt("o", "t", xx, &prompts()),
            Err(QualityError::Prompt(PromptError::Unregistered(_)))
        ));
    }

    #[test]
    fn parse_bare_json() {
        let s = parse_scores(
            r#"{"의미론적 일치성": 5.0, "문법적 정확성": 2.5, "자연스러움과 유창성": 4.3}"#,
            LanguageCode::KO,
            &prompts(),
        )
        .unwrap();
        assert_eq!(s.as_array(), [5.0, 2.5, 4.3]);
    }

    #[test]
    fn parse_prose_wrapped_json() {
        let s = parse_scores(
            r#"Sure! {"语义一致性": 4.8, "语法准确性": 4.5, "语言流畅度": 4.2} hope this helps"#,
            LanguageCode::ZH,
            &prompts(),
        )
        .unwrap();
        assert_eq!(s.as_array(), [4.8, 4.5, 4.2]);
    }

    #[test]
    fn parse_skips_non_json_braces() {
        let raw = r#"{not json} then {"语义一致性": "4.0", "语法准确性": 3, "语言流畅度": 0.04}"#;
        let s = parse_scores(raw, LanguageCode::ZH, &prompts()).unwrap();
        assert_eq!(s.as_array(), [4.0, 3.0, 0.0]);
    }

    #[test]
    fn parse_handles_braces_inside_strings() {
        let raw = r#"{"note": "}", "语义一致性": 1, "语法准确性": 2, "语言流畅度": 3}"#;
        let s = parse_scores(raw, LanguageCode::ZH, &prompts()).unwrap();
        assert_eq!(s.as_array(), [1.0, 2.0, 3.0]);
    }

    #[test]
    fn parse_errors() {
        let p = prompts();
        assert_eq!(
            parse_scores("no json here", LanguageCode::KO, &p),
            Err(QualityError::Parse(ScoreParseError::NoJson))
        );
        assert!(matches!(
            parse_scores(r#"{"의미론적 일치성": 6.1, "문법적 정확성": 2.5, "자연스러움과 유창성": 4.3}"#, LanguageCode::KO, &p),
            Err(QualityError::Parse(ScoreParseError::OutOfRange { .. }))
        ));
        assert_eq!(
            parse_scores(r#"{"의미론적 일치성": 1, "문법적 정확성": 2.5}"#, LanguageCode::KO, &p),
            Err(QualityError::Parse(ScoreParseError::MissingKey(
                "자연스러움과 유창성".into()
            )))
        );
        assert!(matches!(
            parse_scores(r#"{"의미론적 일치성": "high", "문법적 정확성": 2.5, "자연스러움과 유창성": 4.3}"#, LanguageCode::KO, &p),
            Err(QualityError::Parse(ScoreParseError::NotANumber { .. }))
        ));
        assert!(matches!(
            parse_scores(r#"{"의미론적 일치성": -0.5, "문법적 정확성": 2.5, "자연스러움과 유창성": 4.3}"#, LanguageCode::KO, &p),
            Err(QualityError::Parse(ScoreParseError::OutOfRange { .. }))
        ));
    }

    #[test]
    fn tags_match_case_studies() {
        let p = prompts();
        let tag = |a, b, c, lang| render_tag(&QualityScores::new(a, b, c).unwrap(), lang, &p).unwrap();
        assert_eq!(
            tag(2.5, 2.0, 2.3, LanguageCode::KO),
            " [점수] 의미론적 일치성: 2.5, 문법적 정확성: 2.0, 자연스러움과 유창성: 2.3"
        );
        assert_eq!(
            tag(4.5, 4.5, 4.5, LanguageCode::FI),
            " [pisteet] Semanttinen johdonmukaisuus: 4.5, Kieliopillinen tarkkuus: 4.5, Luontevuus ja sujuvuus: 4.5"
        );
        assert_eq!(
            tag(4.8, 4.5, 4.2, LanguageCode::ZH),
            " [分数] 语义一致性: 4.8, 语法准确性: 4.5, 语言流畅度: 4.2"
        );
    }

    #[test]
    fn tag_round_trip_and_strip() {
        let p = prompts();
        let scores = QualityScores::new(0.0, 5.0, 3.4).unwrap();
        for lang in [LanguageCode::KO, LanguageCode::FI, LanguageCode::ZH] {
            let tag = render_tag(&scores, lang, &p).unwrap();
            assert_eq!(parse_tag(&tag, lang, &p).unwrap(), scores);
            let display = format!("번역문{tag}");
            assert_eq!(strip_tag(&display, lang, &p).unwrap(), "번역문");
        }
        assert!(parse_tag(" [점수] 의미론적 일치성: 2.5", LanguageCode::KO, &p).is_err());
    }

    fn translated_cp() -> ContextPassage {
        let src = Passage::new("p", "English text", Some(LanguageCode::EN)).unwrap();
        ContextPassage::translated(src, "⟦ko⟧English text".into())
    }

    #[test]
    fn attach_tag_contract() {
        let p = prompts();
        let scores = QualityScores::new(2.5, 2.0, 2.3).unwrap();
        let tagged = attach_tag(translated_cp(), scores, LanguageCode::KO, &p).unwrap();
        assert_eq!(tagged.status(), ContextStatus::TranslatedTagged);
        assert!(tagged
            .display_text()
            .ends_with(&render_tag(&scores, LanguageCode::KO, &p).unwrap()));
        assert_eq!(tagged.translated_text(), Some("⟦ko⟧English text"));
        assert_eq!(
            strip_tag(tagged.display_text(), LanguageCode::KO, &p).unwrap(),
            "⟦ko⟧English text"
        );
        tagged.check_invariants().unwrap();

        let original =
            ContextPassage::original(Passage::new("o", "한국어", Some(LanguageCode::KO)).unwrap());
        assert!(matches!(
            attach_tag(original, scores, LanguageCode::KO, &p),
            Err(QualityError::Contract(_))
        ));
    }

    fn tagged(a: f64, b: f64, c: f64) -> ContextPassage {
        attach_tag(
            translated_cp(),
            QualityScores::new(a, b, c).unwrap(),
            LanguageCode::KO,
            &prompts(),
        )
        .unwrap()
    }

    #[test]
    fn hard_filter_examples() {
        let original =
            ContextPassage::original(Passage::new("o", "한국어", Some(LanguageCode::KO)).unwrap());
        let unscored = translated_cp().into_unscored("judge down");
        let out = hard_filter(
            vec![
                tagged(3.4, 3.4, 3.4),
                tagged(3.5, 2.0, 2.0),
                original.clone(),
                unscored.clone(),
            ],
            DEFAULT_THRESHOLD,
            FilterRule::AllBelow,
        );
        let statuses: Vec<ContextStatus> = out.iter().map(|p| p.status()).collect();
        assert_eq!(
            statuses,
            [
                ContextStatus::FilteredOut,
                ContextStatus::TranslatedTagged,
                ContextStatus::Original,
                ContextStatus::TranslatedUnscored
            ]
        );
        assert_eq!(out[2], original);
        assert_eq!(out[3], unscored);
        // idempotent
        assert_eq!(hard_filter(out.clone(), DEFAULT_THRESHOLD, FilterRule::AllBelow), out);
    }

    #[test]
    fn any_below_rule() {
        let out = hard_filter(vec![tagged(3.5, 2.0, 4.0)], 3.5, FilterRule::AnyBelow);
        assert_eq!(out[0].status(), ContextStatus::FilteredOut);
        assert_eq!("any-below".parse::<FilterRule>().unwrap(), FilterRule::AnyBelow);
        assert!("sometimes".parse::<FilterRule>().is_err());
    }

    #[test]
    fn scoring_success_and_retry() {
        let p = prompts();
        let prompt = build_assessment_prompt("o", "t", LanguageCode::KO, &p).unwrap();
        let good = r#"{"의미론적 일치성": 4.0, "문법적 정확성": 4.0, "자연스러움과 유창성": 4.0}"#;
        let judge = ScriptedChat::new().with_response(JUDGE_SYSTEM, prompt, good);
        let out = score_translation("o", "t", LanguageCode::KO, &p, &judge, 2).unwrap();
        assert_eq!(out.attempts, 1);
        assert_eq!(out.scores().unwrap().as_array(), [4.0; 3]);
    }

    #[test]
    fn scoring_exhaustion_is_unscored() {
        let p = prompts();
        let garbage = ScriptedChat::new().with_default("I cannot do that.");
        let out = score_translation("o", "t", LanguageCode::KO, &p, &garbage, 2).unwrap();
        assert_eq!(out.attempts, 3);
        assert!(matches!(out.verdict, Verdict::Unscored { .. }));
        assert!(out.scores().is_none());
    }

    /// Fails on the first call, then answers.
    struct FlakyJudge(std::sync::atomic::AtomicUsize, String);

    impl ChatBackend for FlakyJudge {
        fn chat_complete(&self, _: &ChatRequest) -> Result<String, BackendError> {
            if self.0.fetch_add(1, std::sync::atomic::Ordering::SeqCst) == 0 {
                Err(BackendError::Transport {
                    endpoint: "judge".into(),
                    attempts: 1,
                    message: "connection reset".into(),
                })
            } else {
                Ok(self.1.clone())
            }
        }

        fn fingerprint(&self) -> String {
            "flaky".into()
        }
    }

    #[test]
    fn scoring_recovers_after_one_failure() {
        let p = prompts();
        let judge = FlakyJudge(
            Default::default(),
            r#"{"语义一致性": 4.8, "语法准确性": 4.5, "语言流畅度": 4.2}"#.into(),
        );
        let out = score_translation("o", "t", LanguageCode::ZH, &p, &judge, 1).unwrap();
        assert_eq!(out.attempts, 2);
        assert_eq!(out.scores().unwrap().as_array(), [4.8, 4.5, 4.2]);

        let judge = FlakyJudge(Default::default(), "{}".into());
        let out = score_translation("o", "t", LanguageCode::ZH, &p, &judge, 0).unwrap();
        assert!(matches!(out.verdict, Verdict::Unscored { ref reason } if reason.contains("connection reset")));
    }

    #[test]
    fn mock_judge_output_parses_everywhere() {
        let p = prompts();
        let judge = MockJudge::new(&p);
        for lang in [LanguageCode::KO, LanguageCode::FI, LanguageCode::ZH] {
            let out = score_translation("orig", "trans", lang, &p, &judge, 0).unwrap();
            let prompt = build_assessment_prompt("orig", "trans", lang, &p).unwrap();
            assert_eq!(out.scores(), Some(&MockJudge::scores_for(&prompt)));
        }
    }
}
