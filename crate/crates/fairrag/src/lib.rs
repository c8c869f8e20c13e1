//! Command-line experiment runner for fairness-aware retrieval in RAG.
//!
//! Wraps `fairrag-core` with CSV ingestion, config files, a parallel trial
//! runner, a chat-endpoint client and report output.

#![warn(missing_docs)]

pub mod cli;
pub mod config;
pub mod corpus_io;
pub mod endpoint;
pub mod output;
pub mod report;
pub mod runner;
pub mod scores;
