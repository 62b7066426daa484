//! JSONL loaders for benchmark and knowledge-base files, and report
//! persistence.
//!
//! QA lines: `{"id": .., "question": .., "answers": [..], "lang"?: ..}`.
//! KB lines: `{"id": .., "title"?: .., "text": .., "lang"?: ..}`.
//! Blank lines are ignored. Errors carry 1-based line numbers.

use std::fs;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::metrics::{RunReport, REPORT_SCHEMA_VERSION};
use crate::types::{LanguageCode, Passage, QaRecord};

#[derive(Debug, thiserror::Error)]
pub enum DataError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Line {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{path}: no records")]
    Empty { path: PathBuf },
    #[error("{path}: duplicate passage id {id:?} (lines {first} and {second})")]
    DuplicateId {
        path: PathBuf,
        id: String,
        first: usize,
        second: usize,
    },
    #[error("{path}: report schema version {found}, expected {expected}")]
    SchemaVersion {
        path: PathBuf,
        found: u32,
        expected: u32,
    },
    #[error("{path}: invalid report: {message}")]
    Report { path: PathBuf, message: String },
}

#[derive(Deserialize)]
struct QaLine {
    id: String,
    question: String,
    #[serde(alias = "gold_answers")]
    answers: Vec<String>,
    #[serde(default)]
    lang: Option<LanguageCode>,
}

#[derive(Deserialize)]
struct KbLine {
    id: String,
    #[serde(default)]
    title: Option<String>,
    text: String,
    #[serde(default)]
    lang: Option<LanguageCode>,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> DataError + '_ {
    move |source| DataError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn for_each_line<T: for<'de> Deserialize<'de>>(
    path: &Path,
    mut f: impl FnMut(usize, T) -> Result<(), String>,
) -> Result<(), DataError> {
    let file = fs::File::open(path).map_err(io_err(path))?;
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        if line.trim().is_empty() {
            continue;
        }
        let fail = |message: String| DataError::Line {
            path: path.to_path_buf(),
            line: i + 1,
            message,
        };
        let value: T = serde_json::from_str(&line).map_err(|e| fail(e.to_string()))?;
        f(i + 1, value).map_err(fail)?;
    }
    Ok(())
}

/// Loads benchmark records. `default_lang` applies to lines without a
/// `lang` field.
pub fn load_qa(path: &Path, default_lang: Option<LanguageCode>) -> Result<Vec<QaRecord>, DataError> {
    let mut records = Vec::new();
    for_each_line(path, |_, line: QaLine| {
        let lang = line
            .lang
            .or(default_lang)
            .ok_or("no `lang` field and no default language given")?;
        if line.question.trim().is_empty() {
            return Err(format!("record {:?} has an empty question", line.id));
        }
        if line.answers.iter().all(|a| a.trim().is_empty()) {
            return Err(format!("record {:?} has no non-empty answers", line.id));
        }
        records.push(
            QaRecord::new(line.id, line.question, lang, line.answers).map_err(|e| e.to_string())?,
        );
        Ok(())
    })?;
    if records.is_empty() {
        return Err(DataError::Empty {
            path: path.to_path_buf(),
        });
    }
    Ok(records)
}

/// Loaded knowledge base plus skipped-line warnings.
#[derive(Debug, Clone, PartialEq)]
pub struct KnowledgeBase {
    pub passages: Vec<Passage>,
    pub warnings: Vec<String>,
}

/// Loads passages. Lines with blank text are skipped with a warning;
/// duplicate ids are an error.
pub fn load_kb(path: &Path) -> Result<KnowledgeBase, DataError> {
    let mut passages = Vec::new();
    let mut warnings = Vec::new();
    let mut seen = std::collections::HashMap::new();
    let mut duplicate = None;
    for_each_line(path, |lineno, line: KbLine| {
        if let Some(&first) = seen.get(&line.id) {
            duplicate.get_or_insert((line.id.clone(), first, lineno));
            return Ok(());
        }
        seen.insert(line.id.clone(), lineno);
        match Passage::new(line.id, line.text, line.lang) {
            Ok(p) => passages.push(match line.title {
                Some(t) => p.with_title(t),
                None => p,
            }),
            Err(e) => warnings.push(format!("{}:{lineno}: skipped: {e}", path.display())),
        }
        Ok(())
    })?;
    if let Some((id, first, second)) = duplicate {
        return Err(DataError::DuplicateId {
            path: path.to_path_buf(),
            id,
            first,
            second,
        });
    }
    if passages.is_empty() {
        return Err(DataError::Empty {
            path: path.to_path_buf(),
        });
    }
    Ok(KnowledgeBase { passages, warnings })
}

/// Writes a report as pretty JSON.
pub fn save_report(report: &RunReport, path: &Path) -> Result<(), DataError> {
    if report.per_record.is_empty() {
        return Err(DataError::Report {
            path: path.to_path_buf(),
            message: "report has no records".into(),
        });
    }
    let json = serde_json::to_string_pretty(report).expect("report serializes");
    fs::write(path, json + "\n").map_err(io_err(path))
}

pub fn load_report(path: &Path) -> Result<RunReport, DataError> {
    let raw = fs::read_to_string(path).map_err(io_err(path))?;
    let value: serde_json::Value = serde_json::from_str(&raw).map_err(|e| DataError::Report {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    let found = value
        .get("schema_version")
        .and_then(|v| v.as_u64())
        .ok_or_else(|| DataError::Report {
            path: path.to_path_buf(),
            message: "missing schema_version".into(),
        })?;
    if found != u64::from(REPORT_SCHEMA_VERSION) {
        return Err(DataError::SchemaVersion {
            path: path.to_path_buf(),
            found: found as u32,
            expected: REPORT_SCHEMA_VERSION,
        });
    }
    serde_json::from_value(value).map_err(|e| DataError::Report {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::{aggregate, EvalResult};
    use crate::types::PipelineMode;
    use std::io::Write;

    fn write(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn qa_loads_with_default_language() {
        let f = write(
            "{\"id\":\"1\",\"question\":\"수도는?\",\"answers\":[\"서울\"]}\n\n\
             {\"id\":\"2\",\"question\":\"Mikä?\",\"answers\":[\"x\",\"y\"],\"lang\":\"fi\"}\n",
        );
        let recs = load_qa(f.path(), Some(LanguageCode::KO)).unwrap();
        assert_eq!(recs.len(), 2);
        assert_eq!(recs[0].lang, LanguageCode::KO);
        assert_eq!(recs[1].lang, LanguageCode::FI);
        assert_eq!(recs[1].gold_answers, ["x", "y"]);
    }

    #[test]
    fn qa_errors_carry_line_numbers() {
        let f = write("{\"id\":\"1\",\"question\":\"q\",\"answers\":[\"a\"]}\n{\"id\":\"2\",\"question\":\"q\",\"answers\":[]}\n");
        let err = load_qa(f.path(), Some(LanguageCode::KO)).unwrap_err();
        assert!(matches!(err, DataError::Line { line: 2, .. }), "{err}");

        let f = write("{\"id\":\"1\",\"question\":\"q\",\"answers\":[\"a\"]}\n");
        assert!(matches!(load_qa(f.path(), None), Err(DataError::Line { line: 1, .. })));

        let f = write("not json\n");
        assert!(matches!(load_qa(f.path(), Some(LanguageCode::KO)), Err(DataError::Line { line: 1, .. })));

        let f = write("\n");
        assert!(matches!(load_qa(f.path(), Some(LanguageCode::KO)), Err(DataError::Empty { .. })));
    }

    #[test]
    fn kb_skips_blank_text_and_rejects_duplicates() {
        let f = write(
            "{\"id\":\"a\",\"text\":\"Seoul\",\"title\":\"T\",\"lang\":\"en\"}\n\
             {\"id\":\"b\",\"text\":\"  \"}\n\
             {\"id\":\"c\",\"text\":\"서울\"}\n",
        );
        let kb = load_kb(f.path()).unwrap();
        assert_eq!(kb.passages.len(), 2);
        assert_eq!(kb.passages[0].title.as_deref(), Some("T"));
        assert_eq!(kb.warnings.len(), 1);
        assert!(kb.warnings[0].contains(":2:"));

        let f = write("{\"id\":\"a\",\"text\":\"x\"}\n{\"id\":\"a\",\"text\":\"y\"}\n");
        assert!(matches!(
            load_kb(f.path()),
            Err(DataError::DuplicateId { first: 1, second: 2, .. })
        ));
    }

    #[test]
    fn report_round_trip_and_version_check() {
        let report = aggregate(
            vec![EvalResult {
                record_id: "1".into(),
                recall: 0.5,
                best_gold_index: 0,
                failed: false,
            }],
            PipelineMode::Qtt,
            1,
            2,
        )
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.json");
        save_report(&report, &path).unwrap();
        assert_eq!(load_report(&path).unwrap(), report);

        let raw = fs::read_to_string(&path).unwrap().replace("\"schema_version\": 1", "\"schema_version\": 9");
        fs::write(&path, raw).unwrap();
        assert!(matches!(
            load_report(&path),
            Err(DataError::SchemaVersion { found: 9, .. })
        ));

        let empty = RunReport {
            per_record: vec![],
            ..report
        };
        assert!(save_report(&empty, &path).is_err());
    }
}
