//! Trial planning, execution, aggregation and pairwise comparison.
//!
//! Everything here is deterministic given its inputs. The `fairrag` crate
//! runs [`run_trial`] in a worker pool and folds the records back in trial
//! order, so parallelism cannot change results.

use alloc::borrow::ToOwned;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Corpus, CorpusError, Document, GroupLabel};
use crate::generation::{
    build_prompt, duplicate_count, parse_citations, simulate_generation, GenerationError, GeneratorSimParams,
    PromptSpec, Scenario,
};
use crate::metrics::{GenerationMetrics, MetricsError, RetrievalMetrics};
use crate::ranking::{RankedList, Ranker, RankingError};
use crate::relevance::{score_pool, Query, RelevanceError, Scorer};
use crate::stats::{self, StatsError, SummaryStats, TTestResult};
use crate::{trial_rng, TrialRng};

/// Default number of trials per ranker.
pub const DEFAULT_TRIALS: usize = 80;

/// Where a trial's candidate documents come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CandidateSource {
    /// Both group pools of the trial's topic.
    #[default]
    Topic,
    /// The whole corpus.
    Global,
}

impl CandidateSource {
    /// Parses `topic` or `global`.
    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "topic" => Some(Self::Topic),
            "global" => Some(Self::Global),
            _ => None,
        }
    }

    /// Configuration name.
    pub fn name(self) -> &'static str {
        match self {
            Self::Topic => "topic",
            Self::Global => "global",
        }
    }
}

/// Per-trial constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialSettings {
    /// Configured ranker.
    pub ranker: Ranker,
    /// Context size.
    pub k: usize,
    /// Candidate pool size.
    pub pool_size: usize,
    /// Candidate document source.
    pub candidate_source: CandidateSource,
}

/// One planned trial.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrialPlan {
    /// 0-based index within the run.
    pub trial_id: usize,
    /// Question scenario.
    pub scenario: Scenario,
    /// Topic.
    pub topic_id: String,
    /// `base_seed + trial_id`.
    pub seed: u64,
}

/// Assigns `(scenario, topic)` pairs to trials round-robin.
///
/// Pairs are ordered topic-fastest: the first `topics.len()` trials cover
/// every topic with the first scenario, the next block uses the second
/// scenario, and the sequence wraps once all pairs are used.
pub fn plan_trials(topics: &[String], scenarios: &[Scenario], trials: usize, base_seed: u64) -> Vec<TrialPlan> {
    if topics.is_empty() || scenarios.is_empty() {
        return Vec::new();
    }
    let pairs = topics.len() * scenarios.len();
    (0..trials)
        .map(|trial_id| {
            let j = trial_id % pairs;
            TrialPlan {
                trial_id,
                scenario: scenarios[j / topics.len()],
                topic_id: topics[j % topics.len()].clone(),
                seed: base_seed.wrapping_add(trial_id as u64),
            }
        })
        .collect()
}

/// A generator call that did not produce an answer.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{0}")]
pub struct GeneratorFailure(pub String);

/// Produces a model answer for a prompt.
pub trait Generator {
    /// Answers `prompt`; `context` and `rng` are available to simulators.
    fn generate(&self, prompt: &str, context: &RankedList<'_>, rng: &mut TrialRng) -> Result<String, GeneratorFailure>;
}

/// LLM-free generator backed by [`simulate_generation`].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SimulatedGenerator(pub GeneratorSimParams);

impl Generator for SimulatedGenerator {
    fn generate(
        &self,
        _prompt: &str,
        context: &RankedList<'_>,
        rng: &mut TrialRng,
    ) -> Result<String, GeneratorFailure> {
        simulate_generation(context, &self.0, rng).map_err(|e| GeneratorFailure(alloc::format!("{e}")))
    }
}

/// A ranked document as persisted in a trial record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedDoc {
    /// 1-based rank.
    pub position: usize,
    /// Document id.
    pub doc_id: String,
    /// Group.
    pub group: GroupLabel,
    /// Pool-normalized relevance.
    pub norm_score: f64,
}

/// Everything measured in one trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    /// 0-based index within the run.
    pub trial_id: usize,
    /// Scenario id, 1-4.
    pub scenario_id: u8,
    /// Topic.
    pub topic_id: String,
    /// Ranker name.
    pub ranker: String,
    /// Seed of the trial's random source.
    pub seed: u64,
    /// Context in rank order.
    pub ranked: Vec<RankedDoc>,
    /// Retrieval metrics.
    pub retrieval: RetrievalMetrics,
    /// Generation metrics; absent for failed trials.
    pub generation: Option<GenerationMetrics>,
    /// Parsed citations.
    pub citation_count: usize,
    /// Citations matching a context title.
    pub grounded_count: usize,
    /// Citations not matching any context title.
    pub ungrounded_count: usize,
    /// Citations repeating an earlier title.
    pub duplicate_count: usize,
    /// Generator failure message, if any.
    pub failure: Option<String>,
}

impl TrialRecord {
    /// Whether the generator failed.
    pub fn is_failed(&self) -> bool {
        self.failure.is_some()
    }

    /// Groups of the context in rank order.
    pub fn groups(&self) -> Vec<GroupLabel> {
        self.ranked.iter().map(|d| d.group).collect()
    }
}

/// What went wrong inside a trial.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum TrialErrorKind {
    /// Corpus lookup failed.
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    /// Scoring failed.
    #[error(transparent)]
    Relevance(#[from] RelevanceError),
    /// Ranking failed.
    #[error(transparent)]
    Ranking(#[from] RankingError),
    /// Metric computation failed.
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    /// Prompt construction failed.
    #[error(transparent)]
    Generation(#[from] GenerationError),
}

/// A trial error annotated with the trial it came from.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("trial {trial_id}: {kind}")]
pub struct TrialError {
    /// Failing trial.
    pub trial_id: usize,
    /// Cause.
    pub kind: TrialErrorKind,
}

/// Runs one trial end to end: score, rank, prompt, generate, parse, measure.
///
/// Generator failures are recorded in the returned record; every other
/// failure is an error.
pub fn run_trial<S, G>(
    corpus: &Corpus,
    plan: &TrialPlan,
    settings: &TrialSettings,
    scorer: &S,
    generator: &G,
) -> Result<TrialRecord, TrialError>
where
    S: Scorer + ?Sized,
    G: Generator + ?Sized,
{
    let annotate = |kind: TrialErrorKind| TrialError {
        trial_id: plan.trial_id,
        kind,
    };
    let query = Query::new(plan.topic_id.clone(), plan.scenario.question(&plan.topic_id));
    let documents: Vec<&Document> = match settings.candidate_source {
        CandidateSource::Topic => corpus.topic_documents(&plan.topic_id).map_err(|e| annotate(e.into()))?,
        CandidateSource::Global => corpus.documents().iter().collect(),
    };
    let pool = score_pool(&query, &documents, settings.pool_size, scorer).map_err(|e| annotate(e.into()))?;

    let mut rng = trial_rng(plan.seed);
    let list = settings
        .ranker
        .rank(&pool, settings.k, &mut rng)
        .map_err(|e| annotate(e.into()))?;
    let retrieval = RetrievalMetrics::from_list(&list).map_err(|e| annotate(e.into()))?;
    let prompt = build_prompt(&PromptSpec {
        scenario: plan.scenario,
        topic: &plan.topic_id,
        context: &list,
    })
    .map_err(|e| annotate(e.into()))?;

    let ranked = list
        .entries()
        .iter()
        .map(|e| RankedDoc {
            position: e.position,
            doc_id: e.candidate.doc_id().to_owned(),
            group: e.candidate.group(),
            norm_score: e.candidate.norm_score,
        })
        .collect();
    let mut record = TrialRecord {
        trial_id: plan.trial_id,
        scenario_id: plan.scenario.id(),
        topic_id: plan.topic_id.clone(),
        ranker: settings.ranker.name().to_owned(),
        seed: plan.seed,
        ranked,
        retrieval,
        generation: None,
        citation_count: 0,
        grounded_count: 0,
        ungrounded_count: 0,
        duplicate_count: 0,
        failure: None,
    };

    match generator.generate(&prompt, &list, &mut rng) {
        Ok(answer) => {
            let citations = parse_citations(&answer, &list);
            let grounded = citations.iter().filter(|c| c.grounded).count();
            record.generation = Some(GenerationMetrics::compute(
                &citations,
                &list,
                retrieval.exposure_share_protected,
            ));
            record.citation_count = citations.len();
            record.grounded_count = grounded;
            record.ungrounded_count = citations.len() - grounded;
            record.duplicate_count = duplicate_count(&citations);
        }
        Err(failure) => record.failure = Some(failure.0),
    }
    Ok(record)
}

/// Aggregated per-trial metric.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    /// `|share - 0.5|` per trial.
    ExposureDisparity,
    /// Protected exposure share.
    ExposureShare,
    /// Protected fraction of grounded citations.
    GenerationParity,
    /// Grounded fraction of citations.
    Utility,
}

impl Metric {
    /// All metrics in report order.
    pub const ALL: [Metric; 4] = [
        Self::ExposureDisparity,
        Self::ExposureShare,
        Self::GenerationParity,
        Self::Utility,
    ];

    /// Column / CLI name.
    pub fn name(self) -> &'static str {
        match self {
            Self::ExposureDisparity => "exposure_disparity",
            Self::ExposureShare => "exposure_share",
            Self::GenerationParity => "generation_parity",
            Self::Utility => "utility",
        }
    }

    /// Parses a name produced by [`Metric::name`].
    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.name() == name)
    }

    /// The metric's value in a record; `None` when undefined or failed.
    pub fn value(self, record: &TrialRecord) -> Option<f64> {
        if record.is_failed() {
            return None;
        }
        match self {
            Self::ExposureDisparity => Some(record.retrieval.exposure_disparity),
            Self::ExposureShare => Some(record.retrieval.exposure_share_protected),
            Self::GenerationParity => record.generation.and_then(|g| g.demographic_parity),
            Self::Utility => record.generation.map(|g| g.utility),
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Summary of one metric for one ranker.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    /// Which metric.
    pub metric: Metric,
    /// Statistics over defined values; `None` if fewer than two were defined.
    pub stats: Option<SummaryStats>,
    /// Successful trials where the metric was undefined.
    pub excluded: usize,
}

/// All metric summaries of one ranker.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankerAggregate {
    /// Ranker name.
    pub ranker: String,
    /// Records seen, failed included.
    pub trials: usize,
    /// Records whose generator failed.
    pub failed: usize,
    /// One entry per [`Metric::ALL`].
    pub metrics: Vec<MetricSummary>,
}

impl RankerAggregate {
    /// Summary for `metric`.
    pub fn metric(&self, metric: Metric) -> Option<&MetricSummary> {
        self.metrics.iter().find(|m| m.metric == metric)
    }
}

/// Per-ranker aggregates, in order of first appearance.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Aggregates {
    /// Rankers.
    pub rankers: Vec<RankerAggregate>,
}

impl Aggregates {
    /// Aggregate for a ranker name.
    pub fn ranker(&self, name: &str) -> Option<&RankerAggregate> {
        self.rankers.iter().find(|r| r.ranker == name)
    }
}

/// Aggregation and comparison errors.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum AggregateError {
    /// No records.
    #[error("no trial records")]
    NoRecords,
    /// A ranker has fewer than two successful trials.
    #[error("ranker `{ranker}` has {count} successful trials; at least 2 are required")]
    TooFewSamples {
        /// Ranker name.
        ranker: String,
        /// Successful trials.
        count: usize,
    },
    /// Fewer than two rankers to compare.
    #[error("need at least 2 rankers to compare, found {0}")]
    TooFewRankers(usize),
    /// A ranker has no statistics for the metric.
    #[error("ranker `{ranker}` has no defined values for {metric}")]
    MissingMetric {
        /// Ranker name.
        ranker: String,
        /// Metric.
        metric: Metric,
    },
    /// Statistics failure.
    #[error("{ranker_a} vs {ranker_b}: {source}")]
    Stats {
        /// First ranker.
        ranker_a: String,
        /// Second ranker.
        ranker_b: String,
        /// Cause.
        source: StatsError,
    },
}

/// Folds records into per-ranker summaries of every [`Metric`].
///
/// Failed trials are excluded from every metric. Trials with undefined
/// generation parity are excluded from that metric only and counted in
/// [`MetricSummary::excluded`].
pub fn aggregate(records: &[TrialRecord], outlier_z: f64) -> Result<Aggregates, AggregateError> {
    if records.is_empty() {
        return Err(AggregateError::NoRecords);
    }
    let mut names: Vec<&str> = Vec::new();
    for r in records {
        if !names.contains(&r.ranker.as_str()) {
            names.push(&r.ranker);
        }
    }
    let mut rankers = Vec::with_capacity(names.len());
    for name in names {
        let mine: Vec<&TrialRecord> = records.iter().filter(|r| r.ranker == name).collect();
        let ok = mine.iter().filter(|r| !r.is_failed()).count();
        if ok < 2 {
            return Err(AggregateError::TooFewSamples {
                ranker: name.into(),
                count: ok,
            });
        }
        let metrics = Metric::ALL
            .into_iter()
            .map(|metric| {
                let values: Vec<f64> = mine.iter().filter_map(|r| metric.value(r)).collect();
                MetricSummary {
                    metric,
                    stats: stats::summarize_with_threshold(&values, outlier_z).ok(),
                    excluded: ok - values.len(),
                }
            })
            .collect();
        rankers.push(RankerAggregate {
            ranker: name.into(),
            trials: mine.len(),
            failed: mine.len() - ok,
            metrics,
        });
    }
    Ok(Aggregates { rankers })
}

/// One cell of a significance matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairwiseTest {
    /// Compared metric.
    pub metric: Metric,
    /// First ranker (earlier in aggregate order).
    pub ranker_a: String,
    /// Second ranker.
    pub ranker_b: String,
    /// Test outcome.
    pub result: TTestResult,
}

/// t-tests for every ranker pair `(i, j)`, `i < j`, on `metric`.
pub fn compare(aggregates: &Aggregates, metric: Metric, alpha_level: f64) -> Result<Vec<PairwiseTest>, AggregateError> {
    let n = aggregates.rankers.len();
    if n < 2 {
        return Err(AggregateError::TooFewRankers(n));
    }
    let stats_of = |r: &RankerAggregate| {
        r.metric(metric)
            .and_then(|m| m.stats)
            .ok_or_else(|| AggregateError::MissingMetric {
                ranker: r.ranker.clone(),
                metric,
            })
    };
    let mut out = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            let (a, b) = (&aggregates.rankers[i], &aggregates.rankers[j]);
            let result =
                stats::t_test(&stats_of(a)?, &stats_of(b)?, alpha_level).map_err(|source| AggregateError::Stats {
                    ranker_a: a.ranker.clone(),
                    ranker_b: b.ranker.clone(),
                    source,
                })?;
            out.push(PairwiseTest {
                metric,
                ranker_a: a.ranker.clone(),
                ranker_b: b.ranker.clone(),
                result,
            });
        }
    }
    Ok(out)
}
