//! Localized prompt templates, criterion names and tag headers.
//!
//! Resources live as UTF-8 files under `resources/prompts/`:
//!
//! ```text
//! languages.json                 name, criteria keys, tag header per language
//! assessment/<lang>.txt          judge prompt: {original}, {translated}
//! generation/<lang>.system.txt   quality-aware system message
//! generation/<lang>.plain.txt    same without the score sentences
//! generation/user.txt            {documents}, {question}
//! generation/user_no_context.txt {question}
//! dkm/<lang>.system.txt          passage rewrite instruction
//! dkm/<lang>.user.txt            {passage}, {question}
//! ```
//!
//! The `en` files double as templates for languages without their own
//! resources; they carry an extra `{query_language}` placeholder filled
//! with the language name at registration.
//!
//! Placeholders are substituted in a single pass, so values containing
//! `{original}` or similar are inserted literally.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;

use crate::types::LanguageCode;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PromptError {
    #[error("no prompt resources registered for language {0}")]
    Unregistered(LanguageCode),
    #[error("prompt resource {path}: {message}")]
    Resource { path: String, message: String },
}

/// Everything language-specific that the pipeline renders.
#[derive(Debug, Clone, PartialEq)]
pub struct LanguageResources {
    pub lang: LanguageCode,
    pub name: String,
    /// Semantic equivalence, grammatical accuracy, naturalness & fluency.
    pub criteria: [String; 3],
    pub tag_header: String,
    pub assessment_template: String,
    pub qtt_system: String,
    pub plain_system: String,
    pub dkm_system: String,
    pub dkm_user_template: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PromptSet {
    langs: BTreeMap<LanguageCode, LanguageResources>,
    english: LanguageResources,
    user_template: String,
    user_no_context_template: String,
}

#[derive(Debug, Deserialize)]
struct LanguageEntry {
    name: String,
    criteria: [String; 3],
    tag_header: String,
}

/// Substitutes `{name}` for each `(name, value)` pair in one pass.
/// Unknown `{...}` sequences are copied verbatim.
pub fn fill(template: &str, values: &[(&str, &str)]) -> String {
    let mut out = String::with_capacity(template.len());
    let mut rest = template;
    while let Some(open) = rest.find('{') {
        out.push_str(&rest[..open]);
        let after = &rest[open + 1..];
        let replaced = after.find('}').and_then(|close| {
            let name = &after[..close];
            values
                .iter()
                .find(|(k, _)| *k == name)
                .map(|(_, v)| (*v, close))
        });
        match replaced {
            Some((value, close)) => {
                out.push_str(value);
                rest = &after[close + 1..];
            }
            None => {
                out.push('{');
                rest = after;
            }
        }
    }
    out.push_str(rest);
    out
}

fn strip_final_newline(mut s: String) -> String {
    if s.ends_with('\n') {
        s.pop();
        if s.ends_with('\r') {
            s.pop();
        }
    }
    s
}

fn builtin_file(path: &str) -> Option<&'static str> {
    macro_rules! files {
        ($($p:literal),* $(,)?) => {
            match path {
                $($p => Some(include_str!(concat!("../resources/prompts/", $p))),)*
                _ => None,
            }
        };
    }
    files!(
        "languages.json",
        "assessment/ko.txt",
        "assessment/fi.txt",
        "assessment/zh.txt",
        "assessment/en.txt",
        "generation/ko.system.txt",
        "generation/fi.system.txt",
        "generation/zh.system.txt",
        "generation/en.system.txt",
        "generation/ko.plain.txt",
        "generation/fi.plain.txt",
        "generation/zh.plain.txt",
        "generation/en.plain.txt",
        "generation/user.txt",
        "generation/user_no_context.txt",
        "dkm/ko.system.txt",
        "dkm/fi.system.txt",
        "dkm/zh.system.txt",
        "dkm/en.system.txt",
        "dkm/ko.user.txt",
        "dkm/fi.user.txt",
        "dkm/zh.user.txt",
        "dkm/en.user.txt",
    )
}

impl PromptSet {
    /// Korean, Finnish and Chinese resources shipped with the crate.
    pub fn builtin() -> Self {
        Self::assemble(|path| builtin_file(path).map(str::to_string))
            .expect("shipped prompt resources are well formed")
    }

    /// Loads resources from a directory with the layout described in the
    /// module docs.
    pub fn load_dir(dir: &Path) -> Result<Self, PromptError> {
        Self::assemble(|path| std::fs::read_to_string(dir.join(path)).ok())
    }

    fn assemble(read: impl Fn(&str) -> Option<String>) -> Result<Self, PromptError> {
        let need = |path: &str| {
            read(path)
                .map(strip_final_newline)
                .ok_or_else(|| PromptError::Resource {
                    path: path.to_string(),
                    message: "missing".into(),
                })
        };
        let table: BTreeMap<String, LanguageEntry> =
            serde_json::from_str(&need("languages.json")?).map_err(|e| PromptError::Resource {
                path: "languages.json".into(),
                message: e.to_string(),
            })?;
        let english_entry = table.get("en").ok_or_else(|| PromptError::Resource {
            path: "languages.json".into(),
            message: "missing the `en` template entry".into(),
        })?;
        let english = LanguageResources {
            lang: LanguageCode::EN,
            name: english_entry.name.clone(),
            criteria: english_entry.criteria.clone(),
            tag_header: english_entry.tag_header.clone(),
            assessment_template: need("assessment/en.txt")?,
            qtt_system: need("generation/en.system.txt")?,
            plain_system: need("generation/en.plain.txt")?,
            dkm_system: need("dkm/en.system.txt")?,
            dkm_user_template: need("dkm/en.user.txt")?,
        };
        let mut set = PromptSet {
            langs: BTreeMap::new(),
            english,
            user_template: need("generation/user.txt")?,
            user_no_context_template: need("generation/user_no_context.txt")?,
        };
        for (code, entry) in &table {
            if code == "en" {
                continue;
            }
            let lang = LanguageCode::parse(code).map_err(|e| PromptError::Resource {
                path: "languages.json".into(),
                message: e.to_string(),
            })?;
            let resources = LanguageResources {
                lang,
                name: entry.name.clone(),
                criteria: entry.criteria.clone(),
                tag_header: entry.tag_header.clone(),
                assessment_template: need(&format!("assessment/{code}.txt"))?,
                qtt_system: need(&format!("generation/{code}.system.txt"))?,
                plain_system: need(&format!("generation/{code}.plain.txt"))?,
                dkm_system: need(&format!("dkm/{code}.system.txt"))?,
                dkm_user_template: need(&format!("dkm/{code}.user.txt"))?,
            };
            set.langs.insert(lang, resources);
        }
        Ok(set)
    }

    /// Registers `lang` using the English templates with `name` as the
    /// query-language name. Existing registrations are left alone.
    pub fn register_language(&mut self, lang: LanguageCode, name: &str) {
        if self.langs.contains_key(&lang) {
            return;
        }
        let ql = [("query_language", name)];
        let en = &self.english;
        let resources = LanguageResources {
            lang,
            name: name.to_string(),
            criteria: en.criteria.clone(),
            tag_header: en.tag_header.clone(),
            assessment_template: fill(&en.assessment_template, &ql),
            qtt_system: fill(&en.qtt_system, &ql),
            plain_system: fill(&en.plain_system, &ql),
            dkm_system: fill(&en.dkm_system, &ql),
            dkm_user_template: fill(&en.dkm_user_template, &ql),
        };
        self.langs.insert(lang, resources);
    }

    pub fn get(&self, lang: LanguageCode) -> Result<&LanguageResources, PromptError> {
        self.langs.get(&lang).ok_or(PromptError::Unregistered(lang))
    }

    pub fn languages(&self) -> impl Iterator<Item = LanguageCode> + '_ {
        self.langs.keys().copied()
    }

    pub fn all(&self) -> impl Iterator<Item = &LanguageResources> {
        self.langs.values()
    }

    pub fn user_template(&self) -> &str {
        &self.user_template
    }

    pub fn user_no_context_template(&self) -> &str {
        &self.user_no_context_template
    }
}

impl Default for PromptSet {
    fn default() -> Self {
        Self::builtin()
    }
}
