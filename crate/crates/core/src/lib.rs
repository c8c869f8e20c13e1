//! Exposure-aware top-k ranking for retrieval-augmented generation.
//!
//! This crate holds the allocation-only core of the `fairrag` toolkit:
//!
//! - [`corpus`]: biography documents, group labels, and per-topic / global pools.
//! - [`relevance`]: the scorer seam and min-max normalized candidate pools.
//! - [`ranking`]: Standard, Stochastic (Plackett-Luce), Forced-Exposure and
//!   Representative Stochastic rankers, plus the logarithmic exposure model.
//! - [`metrics`]: retrieval exposure share/disparity and generation parity,
//!   utility and fairness-gap metrics.
//! - [`generation`]: prompt construction, citation parsing, and a seeded
//!   citation-selecting generator simulator.
//! - [`stats`]: descriptive statistics, z-score outliers, Student-t quantiles
//!   and the equal-n two-sample t-test.
//! - [`experiment`]: trial planning, single-trial execution, aggregation and
//!   pairwise significance matrices.
//!
//! File formats, the worker pool, the HTTP chat adapter and the CLI live in the
//! `fairrag` crate.
#![no_std]
#![warn(missing_docs)]

extern crate alloc;

pub mod corpus;
pub mod experiment;
pub mod generation;
pub mod metrics;
pub mod ranking;
pub mod relevance;
pub mod stats;

mod sampling;

pub use corpus::{Corpus, Document, GroupLabel};
pub use ranking::{exposure_weight, RankedList, Ranker};
pub use relevance::{CandidatePool, ScoredCandidate, Scorer};

/// Deterministic per-trial random source.
pub type TrialRng = rand_chacha::ChaCha8Rng;

/// Builds the random source for one trial from its seed.
pub fn trial_rng(seed: u64) -> TrialRng {
    use rand::SeedableRng;
    TrialRng::seed_from_u64(seed)
}
