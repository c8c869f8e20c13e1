//! Precomputed relevance scores (`query_id,doc_id,score`).
//!
//! Query ids are topic ids: every scenario for a topic shares the same
//! retrieval scores.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use fairrag_core::relevance::PrecomputedScorer;
use thiserror::Error;

/// Required header, in order.
pub const SCORE_COLUMNS: [&str; 3] = ["query_id", "doc_id", "score"];

/// Errors reading a score table.
#[derive(Debug, Error)]
pub enum ScoresError {
    /// File could not be read.
    #[error("{path}: {source}")]
    Io {
        /// Path involved.
        path: PathBuf,
        /// Cause.
        source: io::Error,
    },
    /// Malformed CSV.
    #[error("scores line {line}: {source}")]
    Csv {
        /// File line.
        line: u64,
        /// Cause.
        source: csv::Error,
    },
    /// Header mismatch or short row.
    #[error("scores line {line}: missing column `{column}`")]
    MissingColumn {
        /// File line.
        line: u64,
        /// Column name.
        column: &'static str,
    },
    /// Score is not a finite number.
    #[error("scores line {line}: invalid score `{value}`")]
    InvalidScore {
        /// File line.
        line: u64,
        /// Offending value.
        value: String,
    },
}

/// Reads a score table into a [`PrecomputedScorer`].
pub fn load_scores(path: &Path) -> Result<PrecomputedScorer, ScoresError> {
    let file = fs::File::open(path).map_err(|source| ScoresError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new().flexible(true).from_reader(file);
    let header = reader
        .headers()
        .map_err(|source| ScoresError::Csv { line: 1, source })?
        .clone();
    for (i, column) in SCORE_COLUMNS.iter().enumerate() {
        if header.get(i).map(str::trim) != Some(*column) {
            return Err(ScoresError::MissingColumn { line: 1, column });
        }
    }
    let mut scorer = PrecomputedScorer::new();
    for (i, row) in reader.records().enumerate() {
        let line = i as u64 + 2;
        let row = row.map_err(|source| ScoresError::Csv { line, source })?;
        let get = |idx: usize| {
            row.get(idx)
                .map(str::trim)
                .filter(|v| !v.is_empty())
                .ok_or(ScoresError::MissingColumn {
                    line,
                    column: SCORE_COLUMNS[idx],
                })
        };
        let (query_id, doc_id, raw) = (get(0)?, get(1)?, get(2)?);
        let score = raw
            .parse::<f64>()
            .ok()
            .filter(|s| s.is_finite())
            .ok_or_else(|| ScoresError::InvalidScore {
                line,
                value: raw.into(),
            })?;
        scorer.insert(query_id, doc_id, score);
    }
    Ok(scorer)
}
