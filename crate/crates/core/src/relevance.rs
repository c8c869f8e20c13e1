//! Relevance scoring and candidate pools.
//!
//! Rankers only look at a candidate's normalized score, group and `doc_id`,
//! so any [`Scorer`] can sit in front of them: the token-overlap
//! [`LexicalScorer`], the seeded [`SyntheticScorer`] for controlled skew
//! studies, or [`PrecomputedScorer`] for scores produced by an external
//! embedder.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::cmp::Ordering;

use rand::{Rng, SeedableRng};
use thiserror::Error;

use crate::corpus::{Document, GroupLabel};
use crate::sampling::fnv1a;

/// Default candidate pool size.
pub const DEFAULT_POOL_SIZE: usize = 50;

/// Errors from scoring and pool construction.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum RelevanceError {
    /// No documents to score.
    #[error("no documents to score")]
    EmptyDocumentSet,
    /// Pool size of zero.
    #[error("pool size must be at least 1")]
    ZeroPoolSize,
    /// The scorer returned NaN or an infinity.
    #[error("non-finite score {score} for document `{doc_id}`")]
    NonFiniteScore {
        /// Offending document.
        doc_id: String,
        /// Returned value.
        score: f64,
    },
    /// A precomputed score table has no entry for the pair.
    #[error("no precomputed score for query `{query_id}` and document `{doc_id}`")]
    MissingScore {
        /// Query identifier.
        query_id: String,
        /// Document identifier.
        doc_id: String,
    },
}

/// A retrieval query.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Query {
    /// Stable identifier used to look up precomputed scores.
    pub id: String,
    /// Query text.
    pub text: String,
}

impl Query {
    /// Creates a query.
    pub fn new(id: impl Into<String>, text: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            text: text.into(),
        }
    }
}

/// Produces a raw relevance score for a (query, document) pair.
///
/// Implementations must be pure: the same inputs give the same score.
pub trait Scorer {
    /// Raw score; larger means more relevant.
    fn score(&self, query: &Query, document: &Document) -> Result<f64, RelevanceError>;
}

impl<S: Scorer + ?Sized> Scorer for &S {
    fn score(&self, query: &Query, document: &Document) -> Result<f64, RelevanceError> {
        (**self).score(query, document)
    }
}

/// A document with its raw and pool-normalized relevance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoredCandidate<'a> {
    /// The underlying document.
    pub document: &'a Document,
    /// Score as returned by the scorer.
    pub raw_score: f64,
    /// Min-max normalized score within the pool, in `[0, 1]`.
    pub norm_score: f64,
}

impl<'a> ScoredCandidate<'a> {
    /// Group of the underlying document.
    pub fn group(&self) -> GroupLabel {
        self.document.group
    }

    /// Identifier of the underlying document.
    pub fn doc_id(&self) -> &'a str {
        &self.document.doc_id
    }
}

/// The top-n candidates for one query, sorted by descending raw score with
/// ties broken by ascending `doc_id`.
#[derive(Debug, Clone)]
pub struct CandidatePool<'a> {
    query: String,
    candidates: Vec<ScoredCandidate<'a>>,
    pool_size: usize,
}

impl<'a> CandidatePool<'a> {
    /// Builds a pool from already-scored documents: sorts, keeps the top
    /// `pool_size`, and min-max normalizes over the retained set.
    ///
    /// When every retained raw score is equal, all normalized scores are 0.5.
    pub fn from_scored(
        query: impl Into<String>,
        scored: Vec<(&'a Document, f64)>,
        pool_size: usize,
    ) -> Result<Self, RelevanceError> {
        if pool_size == 0 {
            return Err(RelevanceError::ZeroPoolSize);
        }
        if scored.is_empty() {
            return Err(RelevanceError::EmptyDocumentSet);
        }
        if let Some((doc, score)) = scored.iter().find(|(_, s)| !s.is_finite()) {
            return Err(RelevanceError::NonFiniteScore {
                doc_id: doc.doc_id.clone(),
                score: *score,
            });
        }
        let mut scored = scored;
        scored.sort_by(|a, b| by_score_then_id(a.1, &a.0.doc_id, b.1, &b.0.doc_id));
        scored.truncate(pool_size);

        let (lo, hi) = scored
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(_, s)| {
                (lo.min(s), hi.max(s))
            });
        let span = hi - lo;
        let candidates = scored
            .into_iter()
            .map(|(document, raw_score)| {
                let norm_score = if span > 0.0 {
                    ((raw_score - lo) / span).clamp(0.0, 1.0)
                } else {
                    0.5
                };
                ScoredCandidate {
                    document,
                    raw_score,
                    norm_score,
                }
            })
            .collect();
        Ok(Self {
            query: query.into(),
            candidates,
            pool_size,
        })
    }

    /// Query text the pool was built for.
    pub fn query(&self) -> &str {
        &self.query
    }

    /// Candidates in pool order.
    pub fn candidates(&self) -> &[ScoredCandidate<'a>] {
        &self.candidates
    }

    /// Configured pool size `n` (an upper bound on `len`).
    pub fn pool_size(&self) -> usize {
        self.pool_size
    }

    /// Number of retained candidates.
    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    /// Whether the pool holds no candidates.
    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }

    /// Number of retained candidates from `group`.
    pub fn group_count(&self, group: GroupLabel) -> usize {
        self.candidates.iter().filter(|c| c.group() == group).count()
    }
}

/// Descending score, then ascending id.
pub(crate) fn by_score_then_id(a_score: f64, a_id: &str, b_score: f64, b_id: &str) -> Ordering {
    b_score.total_cmp(&a_score).then_with(|| a_id.cmp(b_id))
}

/// Scores `documents` against `query` and keeps the top `n` as a normalized pool.
pub fn score_pool<'a, S: Scorer + ?Sized>(
    query: &Query,
    documents: &[&'a Document],
    n: usize,
    scorer: &S,
) -> Result<CandidatePool<'a>, RelevanceError> {
    if documents.is_empty() {
        return Err(RelevanceError::EmptyDocumentSet);
    }
    let scored = documents
        .iter()
        .map(|&doc| scorer.score(query, doc).map(|s| (doc, s)))
        .collect::<Result<Vec<_>, _>>()?;
    CandidatePool::from_scored(query.text.clone(), scored, n)
}

fn terms(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(|t| t.to_lowercase())
}

/// Fraction of distinct query terms that occur in the document's title or
/// text, after lowercasing and stripping punctuation. An empty query scores 0.
pub fn lexical_score(query: &str, document: &Document) -> f64 {
    let query_terms: BTreeSet<String> = terms(query).collect();
    if query_terms.is_empty() {
        return 0.0;
    }
    let doc_terms: BTreeSet<String> = terms(&document.title).chain(terms(&document.text)).collect();
    let hits = query_terms.iter().filter(|t| doc_terms.contains(*t)).count();
    hits as f64 / query_terms.len() as f64
}

/// Token-overlap reference scorer; see [`lexical_score`].
#[derive(Debug, Clone, Copy, Default)]
pub struct LexicalScorer;

impl Scorer for LexicalScorer {
    fn score(&self, query: &Query, document: &Document) -> Result<f64, RelevanceError> {
        Ok(lexical_score(&query.text, document))
    }
}

/// A half-open score range `[low, high)` for synthetic scores.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoreRange {
    /// Inclusive lower bound.
    pub low: f64,
    /// Exclusive upper bound.
    pub high: f64,
}

impl ScoreRange {
    /// Creates a range; `high` must not be below `low`.
    pub fn new(low: f64, high: f64) -> Self {
        debug_assert!(high >= low);
        Self { low, high }
    }
}

impl Default for ScoreRange {
    fn default() -> Self {
        Self::new(0.0, 1.0)
    }
}

/// Seeded scorer drawing uniform scores from a per-group range.
///
/// The draw for a pair is a pure function of `(seed, query.id, doc_id)`, so
/// repeated calls agree and evaluation order does not matter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticScorer {
    /// Base seed.
    pub seed: u64,
    /// Score range for protected documents.
    pub protected: ScoreRange,
    /// Score range for non-protected documents.
    pub non_protected: ScoreRange,
}

impl SyntheticScorer {
    /// Uniform `[0, 1)` scores for both groups.
    pub fn uniform(seed: u64) -> Self {
        Self {
            seed,
            protected: ScoreRange::default(),
            non_protected: ScoreRange::default(),
        }
    }

    /// Separate ranges per group.
    pub fn skewed(seed: u64, protected: ScoreRange, non_protected: ScoreRange) -> Self {
        Self {
            seed,
            protected,
            non_protected,
        }
    }
}

impl Scorer for SyntheticScorer {
    fn score(&self, query: &Query, document: &Document) -> Result<f64, RelevanceError> {
        let key = fnv1a(&[
            &self.seed.to_le_bytes(),
            query.id.as_bytes(),
            document.doc_id.as_bytes(),
        ]);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(key);
        let range = match document.group {
            GroupLabel::Protected => self.protected,
            GroupLabel::NonProtected => self.non_protected,
        };
        let u: f64 = rng.random();
        Ok(range.low + (range.high - range.low) * u)
    }
}

/// Scores looked up from a `(query_id, doc_id) → score` table.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PrecomputedScorer {
    scores: BTreeMap<(String, String), f64>,
}

impl PrecomputedScorer {
    /// Empty table.
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts or replaces one score.
    pub fn insert(&mut self, query_id: impl Into<String>, doc_id: impl Into<String>, score: f64) {
        self.scores.insert((query_id.into(), doc_id.into()), score);
    }

    /// Number of stored pairs.
    pub fn len(&self) -> usize {
        self.scores.len()
    }

    /// Whether the table is empty.
    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }
}

impl Scorer for PrecomputedScorer {
    fn score(&self, query: &Query, document: &Document) -> Result<f64, RelevanceError> {
        // BTreeMap<(String, String), _> cannot be probed with borrowed strs.
        self.scores
            .get(&(query.id.clone(), document.doc_id.clone()))
            .copied()
            .ok_or_else(|| RelevanceError::MissingScore {
                query_id: query.id.to_string(),
                doc_id: document.doc_id.clone(),
            })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::format;
    use alloc::vec;

    fn doc(id: &str, text: &str) -> Document {
        Document::new(id, "T", 1, GroupLabel::Protected, format!("Title {id}"), text, 100)
    }

    #[test]
    fn min_max_normalization() {
        let docs = [doc("a", ""), doc("b", ""), doc("c", "")];
        let pool = CandidatePool::from_scored("q", vec![(&docs[1], 1.0), (&docs[2], 0.0), (&docs[0], 2.0)], 3).unwrap();
        let norms: Vec<f64> = pool.candidates().iter().map(|c| c.norm_score).collect();
        assert_eq!(norms, vec![1.0, 0.5, 0.0]);
        assert_eq!(pool.candidates()[0].doc_id(), "a");
    }

    #[test]
    fn equal_scores_map_to_half() {
        let docs = [doc("a", ""), doc("b", "")];
        let pool = CandidatePool::from_scored("q", vec![(&docs[0], 0.7), (&docs[1], 0.7)], 5).unwrap();
        assert!(pool.candidates().iter().all(|c| c.norm_score == 0.5));
        // tie-break on doc_id
        assert_eq!(pool.candidates()[0].doc_id(), "a");
    }

    #[test]
    fn keeps_top_n() {
        let docs: Vec<Document> = (0..10).map(|i| doc(&format!("d{i}"), "")).collect();
        let scored = docs.iter().enumerate().map(|(i, d)| (d, i as f64)).collect();
        let pool = CandidatePool::from_scored("q", scored, 5).unwrap();
        assert_eq!(pool.len(), 5);
        let ids: Vec<&str> = pool.candidates().iter().map(|c| c.doc_id()).collect();
        assert_eq!(ids, vec!["d9", "d8", "d7", "d6", "d5"]);
    }

    #[test]
    fn empty_and_degenerate_inputs() {
        assert_eq!(
            score_pool(&Query::new("q", "q"), &[], 5, &LexicalScorer).unwrap_err(),
            RelevanceError::EmptyDocumentSet
        );
        let d = doc("a", "");
        assert_eq!(
            CandidatePool::from_scored("q", vec![(&d, 1.0)], 0).unwrap_err(),
            RelevanceError::ZeroPoolSize
        );
        assert!(matches!(
            CandidatePool::from_scored("q", vec![(&d, f64::NAN)], 1),
            Err(RelevanceError::NonFiniteScore { .. })
        ));
    }

    #[test]
    fn lexical_overlap() {
        let both = doc("a", "Work in Quantum mechanics and physics.");
        let neither = doc("b", "A painter.");
        let one = doc("c", "Nobel prize in physics");
        assert_eq!(lexical_score("quantum physics", &both), 1.0);
        assert_eq!(lexical_score("quantum physics", &neither), 0.0);
        assert_eq!(lexical_score("quantum physics", &one), 0.5);
        assert_eq!(lexical_score("", &one), 0.0);
        assert_eq!(lexical_score("?!", &one), 0.0);
    }

    #[test]
    fn synthetic_scores_are_pure_and_in_range() {
        let scorer = SyntheticScorer::skewed(7, ScoreRange::new(0.0, 0.5), ScoreRange::new(0.5, 1.0));
        let q = Query::new("T1", "x");
        let f = doc("f", "");
        let mut m = doc("m", "");
        m.group = GroupLabel::NonProtected;
        let s1 = scorer.score(&q, &f).unwrap();
        assert_eq!(s1, scorer.score(&q, &f).unwrap());
        assert!((0.0..0.5).contains(&s1));
        assert!((0.5..1.0).contains(&scorer.score(&q, &m).unwrap()));
        let other = SyntheticScorer { seed: 8, ..scorer };
        assert_ne!(s1, other.score(&q, &f).unwrap());
    }

    #[test]
    fn precomputed_lookup() {
        let mut scorer = PrecomputedScorer::new();
        scorer.insert("T1", "a", 0.25);
        let a = doc("a", "");
        let b = doc("b", "");
        let q = Query::new("T1", "anything");
        assert_eq!(scorer.score(&q, &a).unwrap(), 0.25);
        assert!(matches!(scorer.score(&q, &b), Err(RelevanceError::MissingScore { .. })));
    }
}
