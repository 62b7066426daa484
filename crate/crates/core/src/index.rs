//! Flat dense-vector index with two-stage retrieval.
//!
//! Search is exhaustive: the query vector is dotted against every row.
//! With unit-length rows the dot product is the cosine similarity.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::backends::{BackendError, Embedder, Reranker};
use crate::scalar::{convert_vector, dot, l2_norm, l2_normalize, Scalar};
use crate::types::{Passage, Query, RetrievedPassage};

#[derive(Debug, thiserror::Error)]
pub enum IndexError {
    #[error("cannot build an index from zero passages")]
    Empty,
    #[error("duplicate passage ids: {}", .0.join(", "))]
    DuplicateIds(Vec<String>),
    #[error("embedding batch at offset {offset} failed: {source}")]
    Embedding {
        offset: usize,
        #[source]
        source: BackendError,
    },
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error("dimension mismatch: index has {expected}, vector has {found}")]
    Dimension { expected: usize, found: usize },
    #[error("vector for {id:?} is not unit length (norm {norm})")]
    NotUnit { id: String, norm: f64 },
    #[error("k and n must be at least 1")]
    ZeroDepth,
    #[error("rerank needs at least one candidate")]
    NoCandidates,
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Passages plus one unit vector per passage, stored row-major.
#[derive(Debug, Clone)]
pub struct VectorIndex<S: Scalar> {
    passages: Vec<Passage>,
    vectors: Vec<S>,
    dimension: usize,
    embedder_fingerprint: String,
}

pub const DEFAULT_EMBED_BATCH: usize = 32;
pub const DEFAULT_TOP_K: usize = 50;
pub const DEFAULT_TOP_N: usize = 5;

const UNIT_TOLERANCE: f64 = 1e-6;

fn check_unique_ids(passages: &[Passage]) -> Result<(), IndexError> {
    let mut seen = HashSet::new();
    let dups: BTreeSet<String> = passages
        .iter()
        .filter(|p| !seen.insert(p.id.as_str()))
        .map(|p| p.id.clone())
        .collect();
    if dups.is_empty() {
        Ok(())
    } else {
        Err(IndexError::DuplicateIds(dups.into_iter().collect()))
    }
}

/// Descending score, then ascending passage id.
fn by_score_then_id(a: (f64, &str), b: (f64, &str)) -> Ordering {
    b.0.total_cmp(&a.0).then_with(|| a.1.cmp(b.1))
}

impl<S: Scalar> VectorIndex<S> {
    /// Embeds `passages` in batches of `batch_size`.
    pub fn build(
        passages: Vec<Passage>,
        embedder: &dyn Embedder,
        batch_size: usize,
    ) -> Result<Self, IndexError> {
        if passages.is_empty() {
            return Err(IndexError::Empty);
        }
        check_unique_ids(&passages)?;
        let batch_size = batch_size.max(1);
        let mut vectors = Vec::new();
        let mut dimension = 0;
        for (chunk_no, chunk) in passages.chunks(batch_size).enumerate() {
            let offset = chunk_no * batch_size;
            let texts: Vec<String> = chunk.iter().map(|p| p.text.clone()).collect();
            let embedded = embedder
                .embed_batch(&texts)
                .map_err(|source| IndexError::Embedding { offset, source })?;
            if embedded.len() != chunk.len() {
                return Err(IndexError::Embedding {
                    offset,
                    source: BackendError::protocol(
                        embedder.fingerprint(),
                        format!("expected {} vectors, got {}", chunk.len(), embedded.len()),
                    ),
                });
            }
            for (passage, row) in chunk.iter().zip(embedded) {
                if dimension == 0 {
                    dimension = row.len();
                }
                if row.len() != dimension || dimension == 0 {
                    return Err(IndexError::Dimension {
                        expected: dimension,
                        found: row.len(),
                    });
                }
                let mut row: Vec<S> = convert_vector(&row);
                if !l2_normalize(&mut row) {
                    return Err(IndexError::NotUnit {
                        id: passage.id.clone(),
                        norm: 0.0,
                    });
                }
                vectors.extend(row);
            }
        }
        Ok(VectorIndex {
            passages,
            vectors,
            dimension,
            embedder_fingerprint: embedder.fingerprint(),
        })
    }

    /// Assembles an index from precomputed vectors, checking every
    /// invariant.
    pub fn from_parts(
        passages: Vec<Passage>,
        rows: Vec<Vec<S>>,
        embedder_fingerprint: impl Into<String>,
    ) -> Result<Self, IndexError> {
        if passages.is_empty() {
            return Err(IndexError::Empty);
        }
        check_unique_ids(&passages)?;
        if rows.len() != passages.len() {
            return Err(IndexError::Dimension {
                expected: passages.len(),
                found: rows.len(),
            });
        }
        let dimension = rows[0].len();
        let mut vectors = Vec::with_capacity(dimension * rows.len());
        for (passage, row) in passages.iter().zip(rows) {
            if row.len() != dimension || dimension == 0 {
                return Err(IndexError::Dimension {
                    expected: dimension,
                    found: row.len(),
                });
            }
            let norm = l2_norm(&row).to_f64_lossy();
            if norm.is_nan() || (norm - 1.0).abs() > UNIT_TOLERANCE {
                return Err(IndexError::NotUnit {
                    id: passage.id.clone(),
                    norm,
                });
            }
            vectors.extend(row);
        }
        Ok(VectorIndex {
            passages,
            vectors,
            dimension,
            embedder_fingerprint: embedder_fingerprint.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.passages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.passages.is_empty()
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn passages(&self) -> &[Passage] {
        &self.passages
    }

    pub fn embedder_fingerprint(&self) -> &str {
        &self.embedder_fingerprint
    }

    pub fn row(&self, i: usize) -> &[S] {
        &self.vectors[i * self.dimension..(i + 1) * self.dimension]
    }

    /// Top-`k` passages for a unit query vector.
    pub fn search(&self, query: &[S], k: usize) -> Result<Vec<RetrievedPassage>, IndexError> {
        if k == 0 {
            return Err(IndexError::ZeroDepth);
        }
        if query.len() != self.dimension {
            return Err(IndexError::Dimension {
                expected: self.dimension,
                found: query.len(),
            });
        }
        let mut scored: Vec<(f64, usize)> = (0..self.len())
            .map(|i| (dot(self.row(i), query).to_f64_lossy(), i))
            .collect();
        scored.sort_by(|a, b| {
            by_score_then_id(
                (a.0, &self.passages[a.1].id),
                (b.0, &self.passages[b.1].id),
            )
        });
        Ok(scored
            .into_iter()
            .take(k)
            .enumerate()
            .map(|(pos, (score, i))| RetrievedPassage {
                passage: self.passages[i].clone(),
                retrieval_score: score,
                rerank_score: None,
                rank: pos + 1,
            })
            .collect())
    }

    /// Embeds the query text and returns the top `k` passages by cosine
    /// similarity, ties broken by ascending passage id.
    pub fn retrieve(
        &self,
        query: &Query,
        k: usize,
        embedder: &dyn Embedder,
    ) -> Result<Vec<RetrievedPassage>, IndexError> {
        if k == 0 {
            return Err(IndexError::ZeroDepth);
        }
        let mut embedded = embedder.embed_batch(std::slice::from_ref(&query.text))?;
        let raw = embedded.pop().ok_or_else(|| {
            BackendError::protocol(embedder.fingerprint(), "no vector for the query")
        })?;
        let mut vector: Vec<S> = convert_vector(&raw);
        if !l2_normalize(&mut vector) {
            return Err(IndexError::NotUnit {
                id: query.id.clone(),
                norm: 0.0,
            });
        }
        self.search(&vector, k)
    }

    /// Writes `passages.jsonl` and `vectors.bin` into `dir`.
    ///
    /// `vectors.bin` is one JSON header line followed by `rows × dimension`
    /// little-endian `f32` values.
    pub fn save(&self, dir: &Path) -> Result<(), IndexError> {
        let io = |path: &Path| {
            let path = path.to_path_buf();
            move |source| IndexError::Io { path, source }
        };
        std::fs::create_dir_all(dir).map_err(io(dir))?;
        let passages_path = dir.join(PASSAGES_FILE);
        let mut out = BufWriter::new(File::create(&passages_path).map_err(io(&passages_path))?);
        for passage in &self.passages {
            let line = serde_json::to_string(passage).expect("passage serializes");
            writeln!(out, "{line}").map_err(io(&passages_path))?;
        }
        out.flush().map_err(io(&passages_path))?;

        let vectors_path = dir.join(VECTORS_FILE);
        let mut out = BufWriter::new(File::create(&vectors_path).map_err(io(&vectors_path))?);
        let header = VectorHeader {
            format: VECTOR_FORMAT.into(),
            version: VECTOR_FORMAT_VERSION,
            dimension: self.dimension,
            rows: self.len(),
            fingerprint: self.embedder_fingerprint.clone(),
        };
        let header = serde_json::to_string(&header).expect("header serializes");
        writeln!(out, "{header}").map_err(io(&vectors_path))?;
        for &x in &self.vectors {
            let value = x.to_f32().unwrap_or(f32::NAN);
            out.write_all(&value.to_le_bytes())
                .map_err(io(&vectors_path))?;
        }
        out.flush().map_err(io(&vectors_path))
    }

    /// Reads an index written by [`VectorIndex::save`]. Rows are
    /// re-normalized in `S` after widening from `f32`.
    pub fn load(dir: &Path) -> Result<Self, IndexError> {
        let passages_path = dir.join(PASSAGES_FILE);
        let format_err = |path: &Path, message: String| IndexError::Format {
            path: path.to_path_buf(),
            message,
        };
        let file = File::open(&passages_path).map_err(|source| IndexError::Io {
            path: passages_path.clone(),
            source,
        })?;
        let mut passages = Vec::new();
        for (no, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|source| IndexError::Io {
                path: passages_path.clone(),
                source,
            })?;
            if line.trim().is_empty() {
                continue;
            }
            let passage: Passage = serde_json::from_str(&line)
                .map_err(|e| format_err(&passages_path, format!("line {}: {e}", no + 1)))?;
            passages.push(passage);
        }

        let vectors_path = dir.join(VECTORS_FILE);
        let file = File::open(&vectors_path).map_err(|source| IndexError::Io {
            path: vectors_path.clone(),
            source,
        })?;
        let mut reader = BufReader::new(file);
        let mut header_line = String::new();
        reader
            .read_line(&mut header_line)
            .map_err(|source| IndexError::Io {
                path: vectors_path.clone(),
                source,
            })?;
        let header: VectorHeader = serde_json::from_str(header_line.trim_end())
            .map_err(|e| format_err(&vectors_path, format!("header: {e}")))?;
        if header.format != VECTOR_FORMAT || header.version != VECTOR_FORMAT_VERSION {
            return Err(format_err(
                &vectors_path,
                format!(
                    "unsupported format {:?} version {}",
                    header.format, header.version
                ),
            ));
        }
        if header.rows != passages.len() {
            return Err(format_err(
                &vectors_path,
                format!(
                    "header declares {} rows but {} passages were read",
                    header.rows,
                    passages.len()
                ),
            ));
        }
        let mut blob = Vec::new();
        reader
            .read_to_end(&mut blob)
            .map_err(|source| IndexError::Io {
                path: vectors_path.clone(),
                source,
            })?;
        let expected = header.rows * header.dimension * 4;
        if blob.len() != expected {
            return Err(format_err(
                &vectors_path,
                format!("expected {expected} bytes of vectors, found {}", blob.len()),
            ));
        }
        let rows: Vec<Vec<S>> = blob
            .chunks_exact(header.dimension * 4)
            .map(|row| {
                let mut v: Vec<S> = row
                    .chunks_exact(4)
                    .map(|b| {
                        let x = f32::from_le_bytes([b[0], b[1], b[2], b[3]]);
                        S::from_f64_lossy(f64::from(x))
                    })
                    .collect();
                l2_normalize(&mut v);
                v
            })
            .collect();
        Self::from_parts(passages, rows, header.fingerprint)
    }
}

pub const PASSAGES_FILE: &str = "passages.jsonl";
pub const VECTORS_FILE: &str = "vectors.bin";
const VECTOR_FORMAT: &str = "qttrag-vectors";
const VECTOR_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct VectorHeader {
    format: String,
    version: u32,
    dimension: usize,
    rows: usize,
    fingerprint: String,
}

/// Rescores `candidates` with the reranker and keeps the top `n`, ranks
/// reassigned from 1. Ties go to the ascending passage id.
pub fn rerank(
    query: &Query,
    candidates: &[RetrievedPassage],
    n: usize,
    reranker: &dyn Reranker,
) -> Result<Vec<RetrievedPassage>, IndexError> {
    if n == 0 {
        return Err(IndexError::ZeroDepth);
    }
    if candidates.is_empty() {
        return Err(IndexError::NoCandidates);
    }
    let texts: Vec<String> = candidates.iter().map(|c| c.passage.text.clone()).collect();
    let scores = reranker.rerank_pairs(&query.text, &texts)?;
    if scores.len() != candidates.len() {
        return Err(BackendError::protocol(
            reranker.fingerprint(),
            format!("expected {} scores, got {}", candidates.len(), scores.len()),
        )
        .into());
    }
    let mut scored: Vec<(f64, &RetrievedPassage)> = scores.into_iter().zip(candidates).collect();
    scored.sort_by(|a, b| by_score_then_id((a.0, &a.1.passage.id), (b.0, &b.1.passage.id)));
    Ok(scored
        .into_iter()
        .take(n)
        .enumerate()
        .map(|(pos, (score, c))| RetrievedPassage {
            passage: c.passage.clone(),
            retrieval_score: c.retrieval_score,
            rerank_score: Some(score),
            rank: pos + 1,
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backends::mock::{HashEmbedder, TrigramReranker};
    use crate::types::{validate_ranking, LanguageCode};
    use std::collections::HashMap;

    /// Looks vectors up by exact text.
    struct TableEmbedder(HashMap<String, Vec<f64>>);

    impl Embedder for TableEmbedder {
        fn embed_batch(&self, texts: &[String]) -> Result<Vec<Vec<f64>>, BackendError> {
            texts
                .iter()
                .map(|t| {
                    self.0
                        .get(t)
                        .cloned()
                        .ok_or_else(|| BackendError::protocol("table", format!("no vector for {t}")))
                })
                .collect()
        }

        fn fingerprint(&self) -> String {
            "table".into()
        }
    }

    fn passage(id: &str, text: &str) -> Passage {
        Passage::new(id, text, None).unwrap()
    }

    fn table_index() -> (VectorIndex<f64>, TableEmbedder) {
        let table = TableEmbedder(HashMap::from([
            ("x".to_string(), vec![1.0, 0.0]),
            ("y".to_string(), vec![0.0, 1.0]),
            ("xy".to_string(), vec![1.0, 1.0]),
        ]));
        let passages = vec![passage("a", "x"), passage("b", "y"), passage("c", "xy")];
        let index = VectorIndex::build(passages, &table, 2).unwrap();
        (index, table)
    }

    fn query(text: &str) -> Query {
        Query::new("q", text, LanguageCode::EN).unwrap()
    }

    #[test]
    fn build_with_mock_embedder() {
        let passages = vec![passage("1", "one"), passage("2", "two"), passage("3", "three")];
        let index: VectorIndex<f32> =
            VectorIndex::build(passages, &HashEmbedder::default(), 2).unwrap();
        assert_eq!(index.len(), 3);
        assert_eq!(index.embedder_fingerprint(), "mock-hash-embedder:dim=64");
        for i in 0..3 {
            assert!((l2_norm(index.row(i)) - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn build_rejects_duplicates_and_empty() {
        let dup = vec![passage("a", "x"), passage("b", "y"), passage("a", "z")];
        let err = VectorIndex::<f64>::build(dup, &HashEmbedder::default(), 8).unwrap_err();
        assert!(err.to_string().contains("a"), "{err}");
        assert!(matches!(err, IndexError::DuplicateIds(ids) if ids == vec!["a".to_string()]));
        let err = VectorIndex::<f64>::build(vec![], &HashEmbedder::default(), 8).unwrap_err();
        assert!(matches!(err, IndexError::Empty));
    }

    #[test]
    fn build_reports_batch_offset() {
        let table = TableEmbedder(HashMap::from([("x".to_string(), vec![1.0, 0.0])]));
        let passages = vec![passage("a", "x"), passage("b", "x"), passage("c", "missing")];
        let err = VectorIndex::<f64>::build(passages, &table, 2).unwrap_err();
        assert!(matches!(err, IndexError::Embedding { offset: 2, .. }), "{err}");
    }

    #[test]
    fn identical_vector_ranks_first() {
        let (index, table) = table_index();
        let hits = index.retrieve(&query("x"), 3, &table).unwrap();
        assert_eq!(hits[0].passage.id, "a");
        assert!((hits[0].retrieval_score - 1.0).abs() < 1e-6);
        assert_eq!(hits[2].passage.id, "b");
        assert!(hits[2].retrieval_score.abs() < 1e-12);
        validate_ranking(&hits).unwrap();
    }

    #[test]
    fn k_beyond_corpus_returns_everything() {
        let (index, table) = table_index();
        let hits = index.retrieve(&query("xy"), 50, &table).unwrap();
        assert_eq!(hits.len(), 3);
        assert_eq!(hits[0].passage.id, "c");
        // a and b tie at cos 45°; ascending id decides
        assert_eq!(hits[1].passage.id, "a");
        assert_eq!(hits[2].passage.id, "b");
        assert!(index.retrieve(&query("xy"), 0, &table).is_err());
    }

    #[test]
    fn rerank_truncates_and_reorders() {
        let candidates: Vec<RetrievedPassage> = (0..50)
            .map(|i| RetrievedPassage {
                passage: passage(&format!("p{i:02}"), &format!("passage number {i}")),
                retrieval_score: 1.0 - i as f64 / 100.0,
                rerank_score: None,
                rank: i + 1,
            })
            .collect();
        let q = query("passage number 42");
        let top = rerank(&q, &candidates, DEFAULT_TOP_N, &TrigramReranker).unwrap();
        assert_eq!(top.len(), 5);
        assert_eq!(top[0].passage.id, "p42");
        validate_ranking(&top).unwrap();
    }

    #[test]
    fn rerank_single_candidate_and_ties() {
        let one = vec![RetrievedPassage {
            passage: passage("z", "nothing alike"),
            retrieval_score: 0.1,
            rerank_score: None,
            rank: 1,
        }];
        let out = rerank(&query("q text"), &one, 5, &TrigramReranker).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].rank, 1);

        // Both score 0.0 under the trigram mock.
        let tie = vec![
            RetrievedPassage {
                passage: passage("b", "zzz"),
                retrieval_score: 0.9,
                rerank_score: None,
                rank: 1,
            },
            RetrievedPassage {
                passage: passage("a", "yyy"),
                retrieval_score: 0.8,
                rerank_score: None,
                rank: 2,
            },
        ];
        let out = rerank(&query("qqq"), &tie, 5, &TrigramReranker).unwrap();
        assert_eq!(out[0].passage.id, "a");
        assert_eq!(out[1].passage.id, "b");
        assert!(rerank(&query("qqq"), &[], 5, &TrigramReranker).is_err());
    }

    #[test]
    fn save_load_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let passages = vec![
            passage("1", "첫 번째 문서").with_title("t"),
            Passage::new("2", "second document", Some(LanguageCode::EN)).unwrap(),
        ];
        let index: VectorIndex<f32> =
            VectorIndex::build(passages, &HashEmbedder::new(16), 8).unwrap();
        index.save(dir.path()).unwrap();
        let loaded: VectorIndex<f32> = VectorIndex::load(dir.path()).unwrap();
        assert_eq!(loaded.passages(), index.passages());
        assert_eq!(loaded.dimension(), 16);
        assert_eq!(loaded.embedder_fingerprint(), index.embedder_fingerprint());
        for i in 0..2 {
            for (a, b) in loaded.row(i).iter().zip(index.row(i)) {
                assert!((a - b).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn load_rejects_truncated_blob() {
        let dir = tempfile::tempdir().unwrap();
        let index: VectorIndex<f64> =
            VectorIndex::build(vec![passage("1", "abc")], &HashEmbedder::new(8), 8).unwrap();
        index.save(dir.path()).unwrap();
        let path = dir.path().join(VECTORS_FILE);
        let mut bytes = std::fs::read(&path).unwrap();
        bytes.truncate(bytes.len() - 3);
        std::fs::write(&path, bytes).unwrap();
        assert!(matches!(
            VectorIndex::<f64>::load(dir.path()),
            Err(IndexError::Format { .. })
        ));
    }
}
