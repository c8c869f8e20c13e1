//! Biography documents and demographic pools.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default number of words kept from each article excerpt.
pub const DEFAULT_TRUNCATION_LIMIT: usize = 100;

/// Binary demographic group carried by every document.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupLabel {
    /// The group whose exposure is safeguarded (female biographies).
    Protected,
    /// Everyone else (male biographies).
    NonProtected,
}

impl GroupLabel {
    /// Decodes a gender annotation, case-insensitively.
    ///
    /// `"female"` maps to [`GroupLabel::Protected`] and `"male"` to
    /// [`GroupLabel::NonProtected`]. Anything else is rejected.
    pub fn from_annotation(annotation: &str) -> Option<Self> {
        let trimmed = annotation.trim();
        if trimmed.eq_ignore_ascii_case("female") {
            Some(Self::Protected)
        } else if trimmed.eq_ignore_ascii_case("male") {
            Some(Self::NonProtected)
        } else {
            None
        }
    }

    /// Canonical annotation written back to CSV.
    pub fn annotation(self) -> &'static str {
        match self {
            Self::Protected => "female",
            Self::NonProtected => "male",
        }
    }

    /// The other group.
    pub fn flipped(self) -> Self {
        match self {
            Self::Protected => Self::NonProtected,
            Self::NonProtected => Self::Protected,
        }
    }

    /// Whether this is the protected group.
    pub fn is_protected(self) -> bool {
        self == Self::Protected
    }
}

impl fmt::Display for GroupLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Protected => f.write_str("protected"),
            Self::NonProtected => f.write_str("non_protected"),
        }
    }
}

/// One biography entry.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    /// Unique identifier within a corpus.
    pub doc_id: String,
    /// Topic (category) identifier.
    pub topic_id: String,
    /// Numeric category identifier.
    pub topic_number: u32,
    /// Demographic group.
    pub group: GroupLabel,
    /// Entity name; citations are matched against it.
    pub title: String,
    /// Article excerpt, whitespace-normalized and truncated.
    pub text: String,
}

impl Document {
    /// Builds a document, normalizing and truncating `text` to `truncation_limit` words.
    pub fn new(
        doc_id: impl Into<String>,
        topic_id: impl Into<String>,
        topic_number: u32,
        group: GroupLabel,
        title: impl Into<String>,
        text: &str,
        truncation_limit: usize,
    ) -> Self {
        Self {
            doc_id: doc_id.into(),
            topic_id: topic_id.into(),
            topic_number,
            group,
            title: title.into(),
            text: truncate_words(text, truncation_limit),
        }
    }
}

/// Collapses whitespace runs to single spaces, trims, and keeps the first
/// `limit` words. A word is a maximal run of non-whitespace characters.
pub fn truncate_words(text: &str, limit: usize) -> String {
    let mut out = String::with_capacity(text.len().min(limit.saturating_mul(8)));
    for (i, word) in text.split_whitespace().take(limit).enumerate() {
        if i > 0 {
            out.push(' ');
        }
        out.push_str(word);
    }
    out
}

/// Number of whitespace-delimited words in `text`.
pub fn word_count(text: &str) -> usize {
    text.split_whitespace().count()
}

/// Errors raised while assembling a corpus.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CorpusError {
    /// The same `doc_id` appears twice.
    #[error("duplicate doc_id `{0}`")]
    DuplicateDocId(String),
    /// A document has an empty title.
    #[error("document `{0}` has an empty title")]
    EmptyTitle(String),
    /// No documents were supplied.
    #[error("corpus is empty")]
    EmptyCorpus,
    /// The requested topic has no documents.
    #[error("unknown topic `{0}`")]
    UnknownTopic(String),
}

/// Indices of documents belonging to each group, in input order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GroupPools {
    protected: Vec<usize>,
    non_protected: Vec<usize>,
}

impl GroupPools {
    fn push(&mut self, group: GroupLabel, index: usize) {
        match group {
            GroupLabel::Protected => self.protected.push(index),
            GroupLabel::NonProtected => self.non_protected.push(index),
        }
    }

    /// Document indices of one group.
    pub fn indices(&self, group: GroupLabel) -> &[usize] {
        match group {
            GroupLabel::Protected => &self.protected,
            GroupLabel::NonProtected => &self.non_protected,
        }
    }

    /// Size of one group's pool.
    pub fn len(&self, group: GroupLabel) -> usize {
        self.indices(group).len()
    }
}

/// An immutable, validated document collection with demographic pools.
#[derive(Debug, Clone)]
pub struct Corpus {
    documents: Vec<Document>,
    topic_order: Vec<String>,
    topic_pools: BTreeMap<String, GroupPools>,
    global_pools: GroupPools,
}

impl Corpus {
    /// Validates documents and builds topic and global pools.
    ///
    /// Pools keep the order in which documents were supplied; topics are
    /// listed in order of first appearance.
    pub fn from_documents(documents: Vec<Document>) -> Result<Self, CorpusError> {
        if documents.is_empty() {
            return Err(CorpusError::EmptyCorpus);
        }
        let mut seen = BTreeMap::new();
        let mut topic_order = Vec::new();
        let mut topic_pools: BTreeMap<String, GroupPools> = BTreeMap::new();
        let mut global_pools = GroupPools::default();
        for (index, doc) in documents.iter().enumerate() {
            if doc.title.trim().is_empty() {
                return Err(CorpusError::EmptyTitle(doc.doc_id.clone()));
            }
            if seen.insert(doc.doc_id.as_str(), index).is_some() {
                return Err(CorpusError::DuplicateDocId(doc.doc_id.clone()));
            }
            let pools = topic_pools.entry(doc.topic_id.clone()).or_insert_with(|| {
                topic_order.push(doc.topic_id.clone());
                GroupPools::default()
            });
            pools.push(doc.group, index);
            global_pools.push(doc.group, index);
        }
        Ok(Self {
            documents,
            topic_order,
            topic_pools,
            global_pools,
        })
    }

    /// All documents in input order.
    pub fn documents(&self) -> &[Document] {
        &self.documents
    }

    /// Number of documents.
    pub fn len(&self) -> usize {
        self.documents.len()
    }

    /// Always false for a constructed corpus; present for API symmetry.
    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    /// Topic identifiers in order of first appearance.
    pub fn topics(&self) -> &[String] {
        &self.topic_order
    }

    /// Whether `topic_id` has at least one document.
    pub fn has_topic(&self, topic_id: &str) -> bool {
        self.topic_pools.contains_key(topic_id)
    }

    /// Documents of `group` within `topic_id`, in input order.
    pub fn pool_for(&self, topic_id: &str, group: GroupLabel) -> Result<Vec<&Document>, CorpusError> {
        let pools = self
            .topic_pools
            .get(topic_id)
            .ok_or_else(|| CorpusError::UnknownTopic(topic_id.into()))?;
        Ok(self.resolve(pools.indices(group)))
    }

    /// Both groups of `topic_id`, in input order.
    pub fn topic_documents(&self, topic_id: &str) -> Result<Vec<&Document>, CorpusError> {
        if !self.has_topic(topic_id) {
            return Err(CorpusError::UnknownTopic(topic_id.into()));
        }
        Ok(self.documents.iter().filter(|d| d.topic_id == topic_id).collect())
    }

    /// Documents of `group` across all topics, in input order.
    pub fn global_pool(&self, group: GroupLabel) -> Vec<&Document> {
        self.resolve(self.global_pools.indices(group))
    }

    /// Size of the global pool for `group`.
    pub fn global_count(&self, group: GroupLabel) -> usize {
        self.global_pools.len(group)
    }

    /// Raw per-topic pools (document indices).
    pub fn topic_pools(&self) -> impl Iterator<Item = (&str, &GroupPools)> {
        self.topic_order.iter().map(move |t| (t.as_str(), &self.topic_pools[t]))
    }

    fn resolve(&self, indices: &[usize]) -> Vec<&Document> {
        indices.iter().map(|&i| &self.documents[i]).collect()
    }
}
