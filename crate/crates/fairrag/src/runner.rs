//! Experiment execution over a worker pool.
//!
//! Each trial owns its random source and fills its own slot; results come
//! back in trial order, so the thread count never changes the output.

use std::path::Path;

use fairrag_core::corpus::{Corpus, Document};
use fairrag_core::experiment::{
    aggregate, plan_trials, run_trial, AggregateError, Aggregates, Generator, GeneratorFailure, SimulatedGenerator,
    TrialError, TrialPlan, TrialRecord, TrialSettings,
};
use fairrag_core::ranking::RankedList;
use fairrag_core::relevance::{LexicalScorer, PrecomputedScorer, Query, RelevanceError, Scorer, SyntheticScorer};
use fairrag_core::TrialRng;
use rayon::prelude::*;
use thiserror::Error;

use crate::config::{ConfigError, ExperimentConfig, GeneratorConfig, ScorerConfig};
use crate::corpus_io::{load_corpus, LoadError};
use crate::endpoint::{ChatClient, EndpointError, EndpointGenerator};
use crate::output::{
    aggregate_csv, atomic_write, trials_jsonl, OutputError, AGGREGATE_FILE, CONFIG_SNAPSHOT_FILE, TRIALS_FILE,
};
use crate::scores::{load_scores, ScoresError};

/// Anything that stops a run.
#[derive(Debug, Error)]
pub enum RunError {
    /// Invalid configuration.
    #[error(transparent)]
    Config(#[from] ConfigError),
    /// Corpus failed to load.
    #[error(transparent)]
    Corpus(#[from] LoadError),
    /// Score table failed to load.
    #[error(transparent)]
    Scores(#[from] ScoresError),
    /// Endpoint client could not be built.
    #[error(transparent)]
    Endpoint(#[from] EndpointError),
    /// The topic filter names a topic absent from the corpus.
    #[error("topic `{0}` is not in the corpus")]
    UnknownTopic(String),
    /// Worker pool could not start.
    #[error("worker pool: {0}")]
    Pool(String),
    /// A trial failed outside the generator.
    #[error(transparent)]
    Trial(#[from] TrialError),
    /// Too many generator failures.
    #[error("ranker `{ranker}`: {failed} of {trials} trials failed, above the {limit:.0}% limit")]
    TooManyFailures {
        /// Ranker name.
        ranker: String,
        /// Failed trials.
        failed: usize,
        /// All trials.
        trials: usize,
        /// Limit in percent.
        limit: f64,
    },
    /// Aggregation failed.
    #[error(transparent)]
    Aggregate(#[from] AggregateError),
    /// Writing artifacts failed.
    #[error(transparent)]
    Output(#[from] OutputError),
}

impl RunError {
    /// Whether the error is a configuration or validation problem (exit 2)
    /// rather than a runtime failure (exit 1).
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            RunError::Config(_) | RunError::Corpus(_) | RunError::Scores(_) | RunError::UnknownTopic(_)
        ) || matches!(
            self,
            RunError::Endpoint(EndpointError::NotConfigured | EndpointError::MissingApiKey(_))
        )
    }
}

/// Scorer chosen by name in the config.
#[derive(Debug, Clone)]
pub enum ConfiguredScorer {
    /// Query-term overlap.
    Lexical(LexicalScorer),
    /// Seeded per-group draws.
    Synthetic(SyntheticScorer),
    /// Precomputed table.
    External(PrecomputedScorer),
}

impl ConfiguredScorer {
    /// Builds the scorer, loading the score table if needed.
    pub fn from_config(config: &ScorerConfig) -> Result<Self, ScoresError> {
        Ok(match config {
            ScorerConfig::Lexical => Self::Lexical(LexicalScorer),
            ScorerConfig::Synthetic {
                seed,
                protected,
                non_protected,
            } => Self::Synthetic(SyntheticScorer::skewed(*seed, *protected, *non_protected)),
            ScorerConfig::External(path) => Self::External(load_scores(path)?),
        })
    }
}

impl Scorer for ConfiguredScorer {
    fn score(&self, query: &Query, document: &Document) -> Result<f64, RelevanceError> {
        match self {
            Self::Lexical(s) => s.score(query, document),
            Self::Synthetic(s) => s.score(query, document),
            Self::External(s) => s.score(query, document),
        }
    }
}

/// Generator chosen by the config.
#[derive(Debug)]
pub enum ConfiguredGenerator {
    /// Seeded simulator.
    Simulated(SimulatedGenerator),
    /// Live endpoint.
    Endpoint(Box<EndpointGenerator>),
}

impl ConfiguredGenerator {
    /// Builds the generator; endpoint mode reads the API key from the environment.
    pub fn from_config(config: &GeneratorConfig) -> Result<Self, EndpointError> {
        Ok(match config {
            GeneratorConfig::Simulated(p) => Self::Simulated(SimulatedGenerator(*p)),
            GeneratorConfig::Endpoint(e) => {
                Self::Endpoint(Box::new(EndpointGenerator(ChatClient::from_env(e.clone())?)))
            }
        })
    }
}

impl Generator for ConfiguredGenerator {
    fn generate(&self, prompt: &str, context: &RankedList<'_>, rng: &mut TrialRng) -> Result<String, GeneratorFailure> {
        match self {
            Self::Simulated(g) => g.generate(prompt, context, rng),
            Self::Endpoint(g) => g.generate(prompt, context, rng),
        }
    }
}

/// Topics used by a run: the filter if given, else every corpus topic.
pub fn resolve_topics(config: &ExperimentConfig, corpus: &Corpus) -> Result<Vec<String>, RunError> {
    if config.topics.is_empty() {
        return Ok(corpus.topics().to_vec());
    }
    for t in &config.topics {
        if !corpus.has_topic(t) {
            return Err(RunError::UnknownTopic(t.clone()));
        }
    }
    Ok(config.topics.clone())
}

fn thread_pool(workers: usize) -> Result<rayon::ThreadPool, RunError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| RunError::Pool(e.to_string()))
}

/// Runs `plans` for one ranker in parallel, preserving trial order.
pub fn run_plans<S, G>(
    corpus: &Corpus,
    plans: &[TrialPlan],
    settings: &TrialSettings,
    scorer: &S,
    generator: &G,
    workers: usize,
) -> Result<Vec<TrialRecord>, RunError>
where
    S: Scorer + Sync + ?Sized,
    G: Generator + Sync + ?Sized,
{
    let pool = thread_pool(workers)?;
    let records = pool.install(|| {
        plans
            .par_iter()
            .map(|plan| run_trial(corpus, plan, settings, scorer, generator))
            .collect::<Result<Vec<_>, _>>()
    })?;
    Ok(records)
}

/// Runs every configured ranker on an already loaded corpus.
///
/// Rankers share the same plans and seeds. Records are grouped by ranker in
/// config order, each group in trial order.
pub fn run_with<S, G>(
    config: &ExperimentConfig,
    corpus: &Corpus,
    scorer: &S,
    generator: &G,
) -> Result<Vec<TrialRecord>, RunError>
where
    S: Scorer + Sync + ?Sized,
    G: Generator + Sync + ?Sized,
{
    config.validate()?;
    let topics = resolve_topics(config, corpus)?;
    let plans = plan_trials(&topics, &config.scenarios, config.trials, config.base_seed);
    let mut all = Vec::with_capacity(plans.len() * config.rankers.len());
    for name in &config.rankers {
        let settings = config.trial_settings(name)?;
        let records = run_plans(corpus, &plans, &settings, scorer, generator, config.workers)?;
        let failed = records.iter().filter(|r| r.is_failed()).count();
        if failed as f64 > config.max_failure_rate * records.len() as f64 {
            return Err(RunError::TooManyFailures {
                ranker: name.clone(),
                failed,
                trials: records.len(),
                limit: config.max_failure_rate * 100.0,
            });
        }
        all.extend(records);
    }
    Ok(all)
}

/// Loads everything named by the config and runs it.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<TrialRecord>, RunError> {
    config.validate()?;
    let corpus = load_corpus(&config.corpus, config.truncate, config.overrides.as_deref())?;
    let scorer = ConfiguredScorer::from_config(&config.scorer)?;
    let generator = ConfiguredGenerator::from_config(&config.generator)?;
    run_with(config, &corpus, &scorer, &generator)
}

/// Records plus their aggregates.
#[derive(Debug, Clone)]
pub struct RunOutput {
    /// Per-trial records.
    pub records: Vec<TrialRecord>,
    /// Per-ranker summaries.
    pub aggregates: Aggregates,
}

/// Runs the config and writes `trials.jsonl`, `aggregate.csv` and a config
/// snapshot into `out_dir`.
pub fn run_to_dir(config: &ExperimentConfig, out_dir: &Path) -> Result<RunOutput, RunError> {
    let records = run_experiment(config)?;
    let aggregates = aggregate(&records, config.outlier_z)?;
    atomic_write(&out_dir.join(TRIALS_FILE), trials_jsonl(&records).as_bytes())?;
    atomic_write(&out_dir.join(AGGREGATE_FILE), aggregate_csv(&aggregates).as_bytes())?;
    atomic_write(&out_dir.join(CONFIG_SNAPSHOT_FILE), config.snapshot().as_bytes())?;
    Ok(RunOutput { records, aggregates })
}
