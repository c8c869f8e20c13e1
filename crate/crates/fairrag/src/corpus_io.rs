//! CSV corpus ingestion and canonical export.
//!
//! The input is a UTF-8 CSV with a mandatory header in this column order:
//!
//! ```text
//! category,category_number,doc_id,gender,entity_name,text
//! ```
//!
//! An optional override directory may hold `<doc_id>.txt` files whose
//! contents replace the CSV text column (useful when full articles were
//! fetched separately). All text is whitespace-normalized and truncated.

use std::collections::HashMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use fairrag_core::corpus::{Corpus, CorpusError, Document, GroupLabel};
use thiserror::Error;

use crate::output::{atomic_write, OutputError};

/// Required header, in order.
pub const COLUMNS: [&str; 6] = ["category", "category_number", "doc_id", "gender", "entity_name", "text"];

/// Errors while loading a corpus. Line numbers are 1-based file lines, the
/// header being line 1.
#[derive(Debug, Error)]
pub enum LoadError {
    /// File could not be read.
    #[error("{path}: {source}")]
    Io {
        /// Path involved.
        path: PathBuf,
        /// Cause.
        source: io::Error,
    },
    /// Malformed CSV.
    #[error("line {line}: {source}")]
    Csv {
        /// File line.
        line: u64,
        /// Cause.
        source: csv::Error,
    },
    /// A required column is absent from the header or empty in a row.
    #[error("line {line}: missing column `{column}`")]
    MissingColumn {
        /// File line.
        line: u64,
        /// Column name.
        column: &'static str,
    },
    /// The gender annotation is neither `female` nor `male`.
    #[error("line {line}: unknown group annotation `{value}`")]
    UnknownGroup {
        /// File line.
        line: u64,
        /// Offending value.
        value: String,
    },
    /// `category_number` is not a non-negative integer.
    #[error("line {line}: invalid category_number `{value}`")]
    InvalidTopicNumber {
        /// File line.
        line: u64,
        /// Offending value.
        value: String,
    },
    /// Repeated `doc_id`.
    #[error("line {line}: duplicate doc_id `{doc_id}` (first seen on line {first})")]
    DuplicateDocId {
        /// File line of the repeat.
        line: u64,
        /// First occurrence.
        first: u64,
        /// The id.
        doc_id: String,
    },
    /// Truncation limit of zero.
    #[error("truncation limit must be positive")]
    ZeroTruncation,
    /// Corpus-level validation failure.
    #[error(transparent)]
    Corpus(#[from] CorpusError),
}

/// Loads, validates and truncates a corpus CSV.
pub fn load_corpus(path: &Path, truncation_limit: usize, overrides: Option<&Path>) -> Result<Corpus, LoadError> {
    if truncation_limit == 0 {
        return Err(LoadError::ZeroTruncation);
    }
    let file = fs::File::open(path).map_err(|source| LoadError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new().flexible(true).from_reader(file);

    let header = reader
        .headers()
        .map_err(|source| LoadError::Csv { line: 1, source })?
        .clone();
    for (i, column) in COLUMNS.iter().enumerate() {
        if header.get(i).map(str::trim) != Some(*column) {
            return Err(LoadError::MissingColumn { line: 1, column });
        }
    }

    let mut documents = Vec::new();
    let mut seen: HashMap<String, u64> = HashMap::new();
    for (i, row) in reader.records().enumerate() {
        let line = i as u64 + 2;
        let row = row.map_err(|source| LoadError::Csv { line, source })?;
        let field = |idx: usize, allow_empty: bool| -> Result<&str, LoadError> {
            match row.get(idx) {
                Some(v) if allow_empty || !v.trim().is_empty() => Ok(v),
                _ => Err(LoadError::MissingColumn {
                    line,
                    column: COLUMNS[idx],
                }),
            }
        };
        let topic_id = field(0, false)?.trim();
        let number_raw = field(1, false)?.trim();
        let doc_id = field(2, false)?.trim();
        let gender = field(3, false)?;
        let title = field(4, false)?.trim();
        let csv_text = field(5, true)?;

        let topic_number = number_raw.parse::<u32>().map_err(|_| LoadError::InvalidTopicNumber {
            line,
            value: number_raw.into(),
        })?;
        let group = GroupLabel::from_annotation(gender).ok_or_else(|| LoadError::UnknownGroup {
            line,
            value: gender.into(),
        })?;
        if let Some(&first) = seen.get(doc_id) {
            return Err(LoadError::DuplicateDocId {
                line,
                first,
                doc_id: doc_id.into(),
            });
        }
        seen.insert(doc_id.into(), line);

        let override_text = match overrides {
            Some(dir) => read_override(dir, doc_id)?,
            None => None,
        };
        let text = override_text.as_deref().unwrap_or(csv_text);
        documents.push(Document::new(
            doc_id,
            topic_id,
            topic_number,
            group,
            title,
            text,
            truncation_limit,
        ));
    }
    Ok(Corpus::from_documents(documents)?)
}

fn read_override(dir: &Path, doc_id: &str) -> Result<Option<String>, LoadError> {
    if doc_id.contains(['/', '\\']) || doc_id == "." || doc_id == ".." {
        return Ok(None);
    }
    let path = dir.join(format!("{doc_id}.txt"));
    match fs::read_to_string(&path) {
        Ok(text) => Ok(Some(text)),
        Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(None),
        Err(source) => Err(LoadError::Io { path, source }),
    }
}

/// Serializes a corpus in the canonical column order.
pub fn corpus_csv(corpus: &Corpus) -> Vec<u8> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(COLUMNS).expect("in-memory write");
    for d in corpus.documents() {
        writer
            .write_record([
                d.topic_id.as_str(),
                &d.topic_number.to_string(),
                &d.doc_id,
                d.group.annotation(),
                &d.title,
                &d.text,
            ])
            .expect("in-memory write");
    }
    writer.into_inner().expect("in-memory flush")
}

/// Writes the canonical CSV atomically.
pub fn write_corpus(corpus: &Corpus, path: &Path) -> Result<(), OutputError> {
    atomic_write(path, &corpus_csv(corpus))
}

/// Document and pool counts, printed by `ingest`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CorpusCounts {
    /// All documents.
    pub documents: usize,
    /// Protected documents.
    pub protected: usize,
    /// Non-protected documents.
    pub non_protected: usize,
    /// Distinct topics.
    pub topics: usize,
}

impl CorpusCounts {
    /// Counts for a corpus.
    pub fn of(corpus: &Corpus) -> Self {
        Self {
            documents: corpus.len(),
            protected: corpus.global_count(GroupLabel::Protected),
            non_protected: corpus.global_count(GroupLabel::NonProtected),
            topics: corpus.topics().len(),
        }
    }
}

impl std::fmt::Display for CorpusCounts {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} documents, {} protected, {} non-protected",
            self.documents, self.protected, self.non_protected
        )
    }
}
