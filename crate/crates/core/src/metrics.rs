//! Character 3-gram recall, cross-lingual share, and run-level reports.

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};
use unicode_normalization::UnicodeNormalization;

use crate::types::PipelineMode;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MetricError {
    #[error("gold answer is empty after trimming")]
    EmptyGold,
    #[error("no non-empty gold answers")]
    NoGolds,
    #[error("cross-lingual share needs at least one input passage")]
    NoInputs,
    #[error("translated count {translated} exceeds input count {input}")]
    TranslatedExceedsInput { translated: usize, input: usize },
    #[error("cannot aggregate an empty result list")]
    EmptyResults,
}

const N: usize = 3;

/// Canonical form used on both sides of the metric: NFC, edges trimmed.
pub fn normalize_for_metric(s: &str) -> Vec<char> {
    let composed: String = s.nfc().collect();
    composed.trim().chars().collect()
}

/// Fraction of the gold answer's distinct character trigrams that occur
/// anywhere in `prediction`.
///
/// Golds shorter than three characters fall back to substring containment.
pub fn char_trigram_recall(gold: &str, prediction: &str) -> Result<f64, MetricError> {
    let gold = normalize_for_metric(gold);
    if gold.is_empty() {
        return Err(MetricError::EmptyGold);
    }
    let prediction = normalize_for_metric(prediction);
    if gold.len() < N {
        let found = prediction.windows(gold.len()).any(|w| w == gold.as_slice());
        return Ok(if found { 1.0 } else { 0.0 });
    }
    let gold_grams: HashSet<&[char]> = gold.windows(N).collect();
    let predicted: HashSet<&[char]> = prediction.windows(N).collect();
    let hits = gold_grams.iter().filter(|g| predicted.contains(*g)).count();
    Ok(hits as f64 / gold_grams.len() as f64)
}

/// Maximum recall over all non-empty golds, with the lowest maximizing
/// index on ties.
pub fn best_recall_over_golds(
    golds: &[impl AsRef<str>],
    prediction: &str,
) -> Result<(f64, usize), MetricError> {
    let mut best: Option<(f64, usize)> = None;
    for (i, gold) in golds.iter().enumerate() {
        let recall = match char_trigram_recall(gold.as_ref(), prediction) {
            Ok(r) => r,
            Err(MetricError::EmptyGold) => continue,
            Err(e) => return Err(e),
        };
        if best.is_none_or(|(b, _)| recall > b) {
            best = Some((recall, i));
        }
    }
    best.ok_or(MetricError::NoGolds)
}

/// `n_translated / n_input`.
pub fn cross_lingual_share(n_translated: usize, n_input: usize) -> Result<f64, MetricError> {
    if n_input == 0 {
        return Err(MetricError::NoInputs);
    }
    if n_translated > n_input {
        return Err(MetricError::TranslatedExceedsInput {
            translated: n_translated,
            input: n_input,
        });
    }
    Ok(n_translated as f64 / n_input as f64)
}

/// Per-record outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalResult {
    pub record_id: String,
    pub recall: f64,
    pub best_gold_index: usize,
    /// Set when the query failed and `recall` was forced to zero.
    #[serde(default)]
    pub failed: bool,
}

/// Provenance attached to every report.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunManifest {
    /// Row label in comparison tables (dataset, generator, ...).
    pub label: String,
    pub config_hash: String,
    pub dataset_hash: String,
    pub backend_fingerprints: BTreeMap<String, String>,
}

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Aggregate over one benchmark run in one pipeline mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub mode: PipelineMode,
    pub n_queries: usize,
    pub n_failed: usize,
    pub mean_recall_pct: f64,
    pub n_translated: usize,
    pub n_input: usize,
    pub cross_lingual_share_pct: f64,
    #[serde(default)]
    pub manifest: RunManifest,
    pub per_record: Vec<EvalResult>,
}

/// Builds a report. A run whose context was empty everywhere reports a
/// cross-lingual share of 0.
pub fn aggregate(
    results: Vec<EvalResult>,
    mode: PipelineMode,
    translated_count: usize,
    input_count: usize,
) -> Result<RunReport, MetricError> {
    if results.is_empty() {
        return Err(MetricError::EmptyResults);
    }
    let share = if input_count == 0 {
        0.0
    } else {
        cross_lingual_share(translated_count, input_count)?
    };
    let mean = results.iter().map(|r| r.recall).sum::<f64>() / results.len() as f64;
    Ok(RunReport {
        schema_version: REPORT_SCHEMA_VERSION,
        mode,
        n_queries: results.len(),
        n_failed: results.iter().filter(|r| r.failed).count(),
        mean_recall_pct: 100.0 * mean,
        n_translated: translated_count,
        n_input: input_count,
        cross_lingual_share_pct: 100.0 * share,
        manifest: RunManifest::default(),
        per_record: results,
    })
}

impl RunReport {
    pub fn with_manifest(mut self, manifest: RunManifest) -> Self {
        self.manifest = manifest;
        self
    }

    /// One-line summary, percentages to one decimal.
    pub fn summary_line(&self) -> String {
        format!(
            "{:<5} n={} recall={:.1}% r_lang={:.1}% failed={}",
            self.mode.as_str(),
            self.n_queries,
            self.mean_recall_pct,
            self.cross_lingual_share_pct,
            self.n_failed
        )
    }
}

fn pad_right(s: &str, width: usize) -> String {
    let len = s.chars().count();
    format!("{s}{}", " ".repeat(width.saturating_sub(len)))
}

fn pad_left(s: &str, width: usize) -> String {
    let len = s.chars().count();
    format!("{}{s}", " ".repeat(width.saturating_sub(len)))
}

/// Fixed-width comparison table: one row per manifest label, one column
/// per pipeline mode present in `reports`, recall percentages to one
/// decimal. Missing cells render as `-`. Later reports win on duplicate
/// (label, mode) pairs.
pub fn render_table(reports: &[RunReport]) -> String {
    let mut rows: Vec<(String, BTreeMap<PipelineMode, f64>)> = Vec::new();
    for report in reports {
        let label = if report.manifest.label.is_empty() {
            "run".to_string()
        } else {
            report.manifest.label.clone()
        };
        let cells = match rows.iter_mut().find(|(l, _)| *l == label) {
            Some((_, cells)) => cells,
            None => {
                rows.push((label, BTreeMap::new()));
                &mut rows.last_mut().expect("just pushed").1
            }
        };
        cells.insert(report.mode, report.mean_recall_pct);
    }
    let modes: Vec<PipelineMode> = PipelineMode::ALL
        .into_iter()
        .filter(|m| reports.iter().any(|r| r.mode == *m))
        .collect();

    let label_width = rows
        .iter()
        .map(|(l, _)| l.chars().count())
        .chain(std::iter::once("Model".len()))
        .max()
        .unwrap_or(5);
    const CELL: usize = 7;
    let total = label_width + modes.len() * (CELL + 1);

    let mut out = String::new();
    out.push_str(&pad_right("", label_width));
    out.push(' ');
    out.push_str("Character 3-gram Recall (%)");
    out.push('\n');
    out.push_str(&pad_right("Model", label_width));
    for mode in &modes {
        out.push(' ');
        out.push_str(&pad_left(mode.label(), CELL));
    }
    out.push('\n');
    out.push_str(&"-".repeat(total));
    out.push('\n');
    for (label, cells) in &rows {
        out.push_str(&pad_right(label, label_width));
        for mode in &modes {
            out.push(' ');
            let cell = cells
                .get(mode)
                .map(|v| format!("{v:.1}"))
                .unwrap_or_else(|| "-".into());
            out.push_str(&pad_left(&cell, CELL));
        }
        out.push('\n');
    }
    out
}
