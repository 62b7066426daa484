//! Source-language detection used to decide translation bypass.
//!
//! A declared corpus language always wins. Otherwise the built-in
//! heuristic classifies by the majority Unicode script among letters
//! (Hangul → `ko`, Han → `zh`) and separates Latin-script languages by
//! stopword hits.

use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::backends::{ChatBackend, ChatRequest};
use crate::types::{LanguageCode, Passage};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DetectionError {
    #[error("passage {id:?} contains no letters")]
    NoLetters { id: String },
    #[error("passage {id:?} is mostly in an unsupported script")]
    UnsupportedScript { id: String },
    #[error("external detector failed: {0}")]
    External(String),
    #[error("stopword list {path}: {message}")]
    Stopwords { path: String, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetectionMethod {
    Declared,
    ScriptHeuristic,
    External,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionResult {
    pub lang: LanguageCode,
    pub confidence: f64,
    pub method: DetectionMethod,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

impl DetectionResult {
    pub fn declared(lang: LanguageCode) -> Self {
        DetectionResult {
            lang,
            confidence: 1.0,
            method: DetectionMethod::Declared,
            warning: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Script {
    Hangul,
    Han,
    Latin,
    Other,
}

/// Script of a letter, by Unicode block.
pub fn script_of(c: char) -> Script {
    match c as u32 {
        0x1100..=0x11FF | 0x3130..=0x318F | 0xA960..=0xA97F | 0xAC00..=0xD7AF
        | 0xD7B0..=0xD7FF => Script::Hangul,
        0x2E80..=0x2FDF | 0x3005 | 0x3007 | 0x3021..=0x3029 | 0x3400..=0x4DBF
        | 0x4E00..=0x9FFF | 0xF900..=0xFAFF | 0x20000..=0x3134F => Script::Han,
        0x0041..=0x005A | 0x0061..=0x007A | 0x00AA | 0x00BA | 0x00C0..=0x024F
        | 0x1E00..=0x1EFF | 0x2C60..=0x2C7F | 0xA720..=0xA7FF | 0xFF21..=0xFF3A
        | 0xFF41..=0xFF5A => Script::Latin,
        _ => Script::Other,
    }
}

/// Anything that can name the language of a passage.
pub trait Detector: Send + Sync {
    fn detect(&self, passage: &Passage) -> Result<DetectionResult, DetectionError>;
}

/// Stopword list for one Latin-script language.
#[derive(Debug, Clone)]
pub struct StopwordList {
    pub lang: LanguageCode,
    words: HashSet<String>,
}

impl StopwordList {
    /// One token per line; blank lines and `#` comments are skipped.
    pub fn parse(lang: LanguageCode, contents: &str) -> Self {
        let words = contents
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(str::to_lowercase)
            .collect();
        StopwordList { lang, words }
    }

    pub fn from_file(lang: LanguageCode, path: &Path) -> Result<Self, DetectionError> {
        let contents = std::fs::read_to_string(path).map_err(|e| DetectionError::Stopwords {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Ok(Self::parse(lang, &contents))
    }

    pub fn contains(&self, word: &str) -> bool {
        self.words.contains(word)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

/// Majority-script heuristic with stopword disambiguation for Latin text.
#[derive(Debug, Clone)]
pub struct ScriptHeuristic {
    latin: Vec<StopwordList>,
    /// Fallback when no Latin candidate has a stopword hit.
    latin_fallback: LanguageCode,
}

impl Default for ScriptHeuristic {
    /// English and Finnish, from the shipped stopword lists.
    fn default() -> Self {
        ScriptHeuristic::new(vec![
            StopwordList::parse(
                LanguageCode::EN,
                include_str!("../resources/stopwords/en.txt"),
            ),
            StopwordList::parse(
                LanguageCode::FI,
                include_str!("../resources/stopwords/fi.txt"),
            ),
        ])
    }
}

impl ScriptHeuristic {
    /// Candidates are tried in order; earlier lists win ties.
    pub fn new(latin: Vec<StopwordList>) -> Self {
        ScriptHeuristic {
            latin,
            latin_fallback: LanguageCode::EN,
        }
    }

    pub fn detect_text(&self, id: &str, text: &str) -> Result<DetectionResult, DetectionError> {
        let (mut hangul, mut han, mut latin, mut total) = (0usize, 0usize, 0usize, 0usize);
        for c in text.chars().filter(|c| c.is_alphabetic()) {
            total += 1;
            match script_of(c) {
                Script::Hangul => hangul += 1,
                Script::Han => han += 1,
                Script::Latin => latin += 1,
                Script::Other => {}
            }
        }
        if total == 0 {
            return Err(DetectionError::NoLetters { id: id.to_string() });
        }
        let other = total - hangul - han - latin;
        let best = hangul.max(han).max(latin);
        if other > best {
            return Err(DetectionError::UnsupportedScript { id: id.to_string() });
        }
        let fraction = best as f64 / total as f64;
        let result = |lang, confidence| DetectionResult {
            lang,
            confidence,
            method: DetectionMethod::ScriptHeuristic,
            warning: None,
        };
        // Hangul before Han: Korean text can carry Hanja.
        if hangul == best {
            return Ok(result(LanguageCode::KO, fraction));
        }
        if han == best {
            return Ok(result(LanguageCode::ZH, fraction));
        }
        Ok(self.disambiguate_latin(text, fraction))
    }

    fn disambiguate_latin(&self, text: &str, script_fraction: f64) -> DetectionResult {
        let lowered = text.to_lowercase();
        let words: Vec<&str> = lowered
            .split(|c: char| !c.is_alphanumeric() && c != '\'')
            .filter(|w| !w.is_empty())
            .collect();
        let hits: Vec<usize> = self
            .latin
            .iter()
            .map(|list| words.iter().filter(|w| list.contains(w)).count())
            .collect();
        let total_hits: usize = hits.iter().sum();
        let winner = hits
            .iter()
            .enumerate()
            .fold(None::<(usize, usize)>, |best, (i, &h)| match best {
                Some((_, bh)) if bh >= h => best,
                _ => Some((i, h)),
            });
        match winner {
            Some((i, h)) if h > 0 => DetectionResult {
                lang: self.latin[i].lang,
                confidence: script_fraction * h as f64 / total_hits as f64,
                method: DetectionMethod::ScriptHeuristic,
                warning: None,
            },
            _ => DetectionResult {
                lang: self.latin_fallback,
                confidence: 0.0,
                method: DetectionMethod::ScriptHeuristic,
                warning: Some(format!(
                    "no stopword hits among {} words; assuming {}",
                    words.len(),
                    self.latin_fallback
                )),
            },
        }
    }
}

impl Detector for ScriptHeuristic {
    fn detect(&self, passage: &Passage) -> Result<DetectionResult, DetectionError> {
        if let Some(lang) = passage.lang {
            return Ok(DetectionResult::declared(lang));
        }
        self.detect_text(&passage.id, &passage.text)
    }
}

/// Asks a chat model for the ISO-639-1 code of the passage.
pub struct ChatDetector<'a> {
    chat: &'a dyn ChatBackend,
}

impl<'a> ChatDetector<'a> {
    const SYSTEM: &'static str = "You identify the language of a text. Reply with the two-letter ISO 639-1 code only.";
    const MAX_CHARS: usize = 1000;

    pub fn new(chat: &'a dyn ChatBackend) -> Self {
        ChatDetector { chat }
    }
}

impl Detector for ChatDetector<'_> {
    fn detect(&self, passage: &Passage) -> Result<DetectionResult, DetectionError> {
        if let Some(lang) = passage.lang {
            return Ok(DetectionResult::declared(lang));
        }
        let sample: String = passage.text.chars().take(Self::MAX_CHARS).collect();
        let mut request = ChatRequest::new(Self::SYSTEM, sample);
        request.max_tokens = 8;
        let reply = self
            .chat
            .chat_complete(&request)
            .map_err(|e| DetectionError::External(e.to_string()))?;
        let code: String = reply
            .trim()
            .trim_matches(|c: char| !c.is_ascii_alphabetic())
            .chars()
            .take(3)
            .collect();
        let lang = LanguageCode::parse(&code)
            .map_err(|_| DetectionError::External(format!("unusable reply {reply:?}")))?;
        Ok(DetectionResult {
            lang,
            confidence: 0.5,
            method: DetectionMethod::External,
            warning: None,
        })
    }
}
