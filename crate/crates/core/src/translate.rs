//! Bypass-or-translate stage.
//!
//! Passages already in the query language pass through byte-for-byte.
//! Everything else is translated whole into the query language. A passage
//! whose translation fails is dropped from the context rather than shown
//! in its source language.

use serde::{Deserialize, Serialize};

use crate::backends::Translator;
use crate::langid::{DetectionError, DetectionResult, Detector};
use crate::types::{ContextPassage, LanguageCode, RetrievedPassage};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranslationOptions {
    /// Truncate source text to this many characters before translating.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_chars: Option<usize>,
}

/// Result of processing one passage, with the decisions made on the way.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TranslationStep {
    pub context: ContextPassage,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detection: Option<DetectionResult>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

pub fn translate_if_needed(
    retrieved: &RetrievedPassage,
    query_lang: LanguageCode,
    detector: &dyn Detector,
    translator: &dyn Translator,
    options: TranslationOptions,
) -> TranslationStep {
    let source = &retrieved.passage;
    let mut warnings = Vec::new();
    let detection = match detector.detect(source) {
        Ok(d) => d,
        // Digits and symbols only: nothing to translate.
        Err(e @ DetectionError::NoLetters { .. }) => {
            warnings.push(format!("{e}; passed through untranslated"));
            return TranslationStep {
                context: ContextPassage::original(source.clone()),
                detection: None,
                warnings,
            };
        }
        Err(e) => {
            let reason = format!("language detection failed: {e}");
            warnings.push(reason.clone());
            return TranslationStep {
                context: ContextPassage::dropped(source.clone(), reason),
                detection: None,
                warnings,
            };
        }
    };
    if let Some(w) = &detection.warning {
        warnings.push(format!("passage {:?}: {w}", source.id));
    }
    if detection.lang == query_lang {
        return TranslationStep {
            context: ContextPassage::original(source.clone()),
            detection: Some(detection),
            warnings,
        };
    }

    let mut input = source.text.as_str();
    let mut truncated_note = None;
    if let Some(limit) = options.max_chars {
        if let Some((cut, _)) = source.text.char_indices().nth(limit) {
            input = &source.text[..cut];
            let note = format!(
                "source truncated to {limit} of {} characters before translation",
                source.text.chars().count()
            );
            warnings.push(format!("passage {:?}: {note}", source.id));
            truncated_note = Some(note);
        }
    }

    let context = match translator.translate_text(input, detection.lang, query_lang) {
        Ok(text) if !text.is_empty() => {
            let cp = ContextPassage::translated(source.clone(), text);
            match truncated_note {
                Some(note) => cp.with_note(note),
                None => cp,
            }
        }
        Ok(_) => {
            let reason = "translator returned empty text".to_string();
            warnings.push(format!("passage {:?}: {reason}", source.id));
            ContextPassage::dropped(source.clone(), reason)
        }
        Err(e) => {
            let reason = format!("translation failed: {e}");
            warnings.push(format!("passage {:?}: {reason}", source.id));
            ContextPassage::dropped(source.clone(), reason)
        }
    };
    TranslationStep {
        context,
        detection: Some(detection),
        warnings,
    }
}
