//! Experiment configuration: flat `key = value` text with `#` comments.
//!
//! Relative paths resolve against the directory of the config file.
//! Unknown and repeated keys are rejected by name.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use fairrag_core::corpus::DEFAULT_TRUNCATION_LIMIT;
use fairrag_core::experiment::{CandidateSource, TrialSettings, DEFAULT_TRIALS};
use fairrag_core::generation::{GeneratorSimParams, Scenario};
use fairrag_core::ranking::{Ranker, RankerSettings, DEFAULT_K};
use fairrag_core::relevance::{ScoreRange, DEFAULT_POOL_SIZE};
use fairrag_core::stats::DEFAULT_OUTLIER_Z;
use thiserror::Error;

use crate::endpoint::EndpointConfig;

/// Every accepted key.
pub const KEYS: [&str; 37] = [
    "corpus",
    "truncate",
    "overrides",
    "scorer",
    "scores",
    "synthetic_seed",
    "synthetic_protected_low",
    "synthetic_protected_high",
    "synthetic_non_protected_low",
    "synthetic_non_protected_high",
    "ranker",
    "k",
    "pool_size",
    "trials",
    "scenarios",
    "topics",
    "base_seed",
    "candidates",
    "generator",
    "alpha",
    "gamma",
    "tau",
    "min_per_group",
    "num_citations",
    "position_bias",
    "group_bias",
    "hallucination_prob",
    "outlier_z",
    "endpoint_url",
    "endpoint_model",
    "temperature",
    "api_key_env",
    "requests_per_minute",
    "workers",
    "max_failure_rate",
    "retries",
    "timeout_secs",
];

/// Configuration errors. Each names the offending key where there is one.
#[derive(Debug, Error)]
pub enum ConfigError {
    /// Config file unreadable.
    #[error("{path}: {source}")]
    Io {
        /// Path.
        path: PathBuf,
        /// Cause.
        source: std::io::Error,
    },
    /// A line without `=`.
    #[error("line {line}: expected `key = value`")]
    Syntax {
        /// 1-based line.
        line: usize,
    },
    /// Key not in [`KEYS`].
    #[error("line {line}: unknown config key `{key}`")]
    UnknownKey {
        /// 1-based line.
        line: usize,
        /// The key.
        key: String,
    },
    /// Key given twice.
    #[error("line {line}: duplicate config key `{key}`")]
    DuplicateKey {
        /// 1-based line.
        line: usize,
        /// The key.
        key: String,
    },
    /// Value does not parse or is out of range.
    #[error("invalid value for `{key}`: {reason}")]
    InvalidValue {
        /// The key.
        key: &'static str,
        /// Why.
        reason: String,
    },
    /// Required key absent.
    #[error("missing required config key `{0}`")]
    Missing(&'static str),
}

fn invalid(key: &'static str, reason: impl Into<String>) -> ConfigError {
    ConfigError::InvalidValue {
        key,
        reason: reason.into(),
    }
}

/// How relevance is scored.
#[derive(Debug, Clone, PartialEq)]
pub enum ScorerConfig {
    /// Query-term overlap.
    Lexical,
    /// Seeded per-group uniform draws.
    Synthetic {
        /// Seed.
        seed: u64,
        /// Protected range.
        protected: ScoreRange,
        /// Non-protected range.
        non_protected: ScoreRange,
    },
    /// Precomputed `query_id,doc_id,score` table.
    External(PathBuf),
}

/// How answers are produced.
#[derive(Debug, Clone, PartialEq)]
pub enum GeneratorConfig {
    /// Seeded simulator.
    Simulated(GeneratorSimParams),
    /// Live chat endpoint.
    Endpoint(EndpointConfig),
}

/// A validated experiment configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    /// Corpus CSV.
    pub corpus: PathBuf,
    /// Word limit per document.
    pub truncate: usize,
    /// Optional `<doc_id>.txt` override directory.
    pub overrides: Option<PathBuf>,
    /// Relevance scorer.
    pub scorer: ScorerConfig,
    /// Ranker names; each gets `trials` trials on the same seeds.
    pub rankers: Vec<String>,
    /// Ranker parameters.
    pub ranker_settings: RankerSettings,
    /// Context size.
    pub k: usize,
    /// Candidate pool size.
    pub pool_size: usize,
    /// Trials per ranker.
    pub trials: usize,
    /// Scenarios in use.
    pub scenarios: Vec<Scenario>,
    /// Topic filter; empty means every topic in the corpus.
    pub topics: Vec<String>,
    /// Trial `i` uses `base_seed + i`.
    pub base_seed: u64,
    /// Where candidates come from.
    pub candidates: CandidateSource,
    /// Answer generator.
    pub generator: GeneratorConfig,
    /// Outlier threshold.
    pub outlier_z: f64,
    /// Worker threads; 0 uses all cores.
    pub workers: usize,
    /// Failed-trial fraction above which a run aborts.
    pub max_failure_rate: f64,
}

impl ExperimentConfig {
    /// Defaults around a corpus path.
    pub fn new(corpus: impl Into<PathBuf>) -> Self {
        Self {
            corpus: corpus.into(),
            truncate: DEFAULT_TRUNCATION_LIMIT,
            overrides: None,
            scorer: ScorerConfig::Lexical,
            rankers: vec!["standard".into()],
            ranker_settings: RankerSettings::default(),
            k: DEFAULT_K,
            pool_size: DEFAULT_POOL_SIZE,
            trials: DEFAULT_TRIALS,
            scenarios: Scenario::ALL.to_vec(),
            topics: Vec::new(),
            base_seed: 0,
            candidates: CandidateSource::Topic,
            generator: GeneratorConfig::Simulated(GeneratorSimParams::default()),
            outlier_z: DEFAULT_OUTLIER_Z,
            workers: 0,
            max_failure_rate: 0.1,
        }
    }

    /// Reads and validates a config file.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let base = path.parent().unwrap_or(Path::new(""));
        Self::parse(&text, base)
    }

    /// Parses config text; relative paths are joined onto `base_dir`.
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self, ConfigError> {
        let pairs = parse_pairs(text)?;
        let get = |key: &str| pairs.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str());
        let path_of = |v: &str| {
            let p = PathBuf::from(v);
            if p.is_absolute() {
                p
            } else {
                base_dir.join(p)
            }
        };

        let mut cfg = Self::new(path_of(get("corpus").ok_or(ConfigError::Missing("corpus"))?));
        if let Some(v) = get("truncate") {
            cfg.truncate = parse_num(v, "truncate")?;
        }
        cfg.overrides = get("overrides").map(path_of);

        cfg.scorer = match get("scorer").unwrap_or("lexical") {
            "lexical" => ScorerConfig::Lexical,
            "synthetic" => {
                let f = |key, default| get(key).map_or(Ok(default), |v| parse_f64(v, key));
                let protected = range(
                    "synthetic_protected_high",
                    f("synthetic_protected_low", 0.0)?,
                    f("synthetic_protected_high", 1.0)?,
                )?;
                let non_protected = range(
                    "synthetic_non_protected_high",
                    f("synthetic_non_protected_low", 0.0)?,
                    f("synthetic_non_protected_high", 1.0)?,
                )?;
                ScorerConfig::Synthetic {
                    seed: get("synthetic_seed").map_or(Ok(0), |v| parse_num(v, "synthetic_seed"))?,
                    protected,
                    non_protected,
                }
            }
            "external" => ScorerConfig::External(path_of(get("scores").ok_or(ConfigError::Missing("scores"))?)),
            other => return Err(invalid("scorer", format!("unknown scorer `{other}`"))),
        };

        if let Some(v) = get("ranker") {
            cfg.rankers = split_list(v).map(str::to_owned).collect();
        }
        let rs = &mut cfg.ranker_settings;
        if let Some(v) = get("alpha") {
            rs.alpha = parse_f64(v, "alpha")?;
        }
        if let Some(v) = get("gamma") {
            rs.gamma = parse_f64(v, "gamma")?;
        }
        if let Some(v) = get("tau") {
            rs.tau = parse_f64(v, "tau")?;
        }
        if let Some(v) = get("min_per_group") {
            rs.min_per_group = Some(parse_num(v, "min_per_group")?);
        }
        if let Some(v) = get("k") {
            cfg.k = parse_num(v, "k")?;
        }
        if let Some(v) = get("pool_size") {
            cfg.pool_size = parse_num(v, "pool_size")?;
        }
        if let Some(v) = get("trials") {
            cfg.trials = parse_num(v, "trials")?;
        }
        if let Some(v) = get("scenarios") {
            cfg.scenarios = parse_scenarios(v)?;
        }
        if let Some(v) = get("topics") {
            cfg.topics = split_list(v).map(str::to_owned).collect();
        }
        if let Some(v) = get("base_seed") {
            cfg.base_seed = parse_num(v, "base_seed")?;
        }
        if let Some(v) = get("candidates") {
            cfg.candidates =
                CandidateSource::from_name(v).ok_or_else(|| invalid("candidates", format!("unknown source `{v}`")))?;
        }
        if let Some(v) = get("outlier_z") {
            cfg.outlier_z = parse_f64(v, "outlier_z")?;
        }
        if let Some(v) = get("workers") {
            cfg.workers = parse_num(v, "workers")?;
        }
        if let Some(v) = get("max_failure_rate") {
            cfg.max_failure_rate = parse_f64(v, "max_failure_rate")?;
        }

        cfg.generator = match get("generator").unwrap_or("simulated") {
            "simulated" => {
                let mut p = GeneratorSimParams::default();
                if let Some(v) = get("num_citations") {
                    p.num_citations = parse_num(v, "num_citations")?;
                }
                if let Some(v) = get("position_bias") {
                    p.position_bias_beta = parse_f64(v, "position_bias")?;
                }
                if let Some(v) = get("group_bias") {
                    p.group_bias_b = parse_f64(v, "group_bias")?;
                }
                if let Some(v) = get("hallucination_prob") {
                    p.hallucination_prob_h = parse_f64(v, "hallucination_prob")?;
                }
                p.validate().map_err(|e| invalid("generator", e.to_string()))?;
                GeneratorConfig::Simulated(p)
            }
            "endpoint" => {
                let mut e = EndpointConfig {
                    url: get("endpoint_url").ok_or(ConfigError::Missing("endpoint_url"))?.into(),
                    ..EndpointConfig::default()
                };
                if let Some(v) = get("endpoint_model") {
                    e.model = v.into();
                }
                if let Some(v) = get("temperature") {
                    e.temperature = parse_f64(v, "temperature")?;
                }
                if let Some(v) = get("api_key_env") {
                    e.api_key_env = v.into();
                }
                if let Some(v) = get("requests_per_minute") {
                    e.requests_per_minute = parse_num(v, "requests_per_minute")?;
                }
                if let Some(v) = get("retries") {
                    e.max_attempts = parse_num(v, "retries")?;
                }
                if let Some(v) = get("timeout_secs") {
                    e.timeout = std::time::Duration::from_secs(parse_num(v, "timeout_secs")?);
                }
                GeneratorConfig::Endpoint(e)
            }
            other => return Err(invalid("generator", format!("unknown generator `{other}`"))),
        };

        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks cross-field invariants.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.truncate == 0 {
            return Err(invalid("truncate", "must be positive"));
        }
        if self.k == 0 {
            return Err(invalid("k", "must be positive"));
        }
        if self.k > self.pool_size {
            return Err(invalid(
                "k",
                format!("k = {} exceeds pool_size = {}", self.k, self.pool_size),
            ));
        }
        if self.trials < 2 {
            return Err(invalid("trials", "at least 2 trials are required"));
        }
        if self.scenarios.is_empty() {
            return Err(invalid("scenarios", "at least one scenario is required"));
        }
        if !(self.outlier_z > 0.0 && self.outlier_z.is_finite()) {
            return Err(invalid("outlier_z", "must be positive"));
        }
        if !(0.0..=1.0).contains(&self.max_failure_rate) {
            return Err(invalid("max_failure_rate", "must lie in [0, 1]"));
        }
        let rs = &self.ranker_settings;
        if !(rs.alpha >= 0.0 && rs.alpha.is_finite()) {
            return Err(invalid("alpha", "must be finite and non-negative"));
        }
        if !(rs.gamma >= 0.0 && rs.gamma.is_finite()) {
            return Err(invalid("gamma", "must be finite and non-negative"));
        }
        if !(0.0..=1.0).contains(&rs.tau) {
            return Err(invalid("tau", "must lie in [0, 1]"));
        }
        if let Some(m) = rs.min_per_group {
            if 2 * m > self.k {
                return Err(invalid("min_per_group", format!("2 * {m} exceeds k = {}", self.k)));
            }
        }
        if self.rankers.is_empty() {
            return Err(invalid("ranker", "at least one ranker is required"));
        }
        for name in &self.rankers {
            self.build_ranker(name)?;
        }
        Ok(())
    }

    /// Resolves a ranker name with this config's parameters.
    pub fn build_ranker(&self, name: &str) -> Result<Ranker, ConfigError> {
        Ranker::from_name(name, &self.ranker_settings).map_err(|e| invalid("ranker", e.to_string()))
    }

    /// Per-trial settings for one ranker.
    pub fn trial_settings(&self, ranker: &str) -> Result<TrialSettings, ConfigError> {
        Ok(TrialSettings {
            ranker: self.build_ranker(ranker)?,
            k: self.k,
            pool_size: self.pool_size,
            candidate_source: self.candidates,
        })
    }

    /// Canonical `key = value` rendering of the resolved configuration.
    ///
    /// Secrets never appear: only the name of the key variable is written.
    pub fn snapshot(&self) -> String {
        let mut out = String::new();
        let mut line = |k: &str, v: &dyn std::fmt::Display| {
            let _ = writeln!(out, "{k} = {v}");
        };
        line("corpus", &self.corpus.display());
        line("truncate", &self.truncate);
        if let Some(o) = &self.overrides {
            line("overrides", &o.display());
        }
        match &self.scorer {
            ScorerConfig::Lexical => line("scorer", &"lexical"),
            ScorerConfig::Synthetic {
                seed,
                protected,
                non_protected,
            } => {
                line("scorer", &"synthetic");
                line("synthetic_seed", seed);
                line("synthetic_protected_low", &protected.low);
                line("synthetic_protected_high", &protected.high);
                line("synthetic_non_protected_low", &non_protected.low);
                line("synthetic_non_protected_high", &non_protected.high);
            }
            ScorerConfig::External(p) => {
                line("scorer", &"external");
                line("scores", &p.display());
            }
        }
        line("ranker", &self.rankers.join(","));
        line("alpha", &self.ranker_settings.alpha);
        line("gamma", &self.ranker_settings.gamma);
        line("tau", &self.ranker_settings.tau);
        if let Some(m) = self.ranker_settings.min_per_group {
            line("min_per_group", &m);
        }
        line("k", &self.k);
        line("pool_size", &self.pool_size);
        line("trials", &self.trials);
        let scenarios: Vec<String> = self.scenarios.iter().map(|s| s.id().to_string()).collect();
        line("scenarios", &scenarios.join(","));
        if !self.topics.is_empty() {
            line("topics", &self.topics.join(","));
        }
        line("base_seed", &self.base_seed);
        line("candidates", &self.candidates.name());
        match &self.generator {
            GeneratorConfig::Simulated(p) => {
                line("generator", &"simulated");
                line("num_citations", &p.num_citations);
                line("position_bias", &p.position_bias_beta);
                line("group_bias", &p.group_bias_b);
                line("hallucination_prob", &p.hallucination_prob_h);
            }
            GeneratorConfig::Endpoint(e) => {
                line("generator", &"endpoint");
                line("endpoint_url", &e.url);
                line("endpoint_model", &e.model);
                line("temperature", &e.temperature);
                line("api_key_env", &e.api_key_env);
                line("requests_per_minute", &e.requests_per_minute);
                line("retries", &e.max_attempts);
                line("timeout_secs", &e.timeout.as_secs());
            }
        }
        line("outlier_z", &self.outlier_z);
        line("workers", &self.workers);
        line("max_failure_rate", &self.max_failure_rate);
        out
    }
}

fn parse_pairs(text: &str) -> Result<Vec<(String, String)>, ConfigError> {
    let mut seen = HashSet::new();
    let mut pairs = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content.split_once('=').ok_or(ConfigError::Syntax { line })?;
        let key = key.trim();
        if !KEYS.contains(&key) {
            return Err(ConfigError::UnknownKey { line, key: key.into() });
        }
        if !seen.insert(key.to_owned()) {
            return Err(ConfigError::DuplicateKey { line, key: key.into() });
        }
        pairs.push((key.to_owned(), value.trim().to_owned()));
    }
    Ok(pairs)
}

fn parse_num<T: std::str::FromStr>(v: &str, key: &'static str) -> Result<T, ConfigError> {
    v.parse()
        .map_err(|_| invalid(key, format!("`{v}` is not a non-negative integer")))
}

fn parse_f64(v: &str, key: &'static str) -> Result<f64, ConfigError> {
    v.parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| invalid(key, format!("`{v}` is not a finite number")))
}

fn range(key: &'static str, low: f64, high: f64) -> Result<ScoreRange, ConfigError> {
    if high < low {
        return Err(invalid(key, format!("upper bound {high} is below lower bound {low}")));
    }
    Ok(ScoreRange::new(low, high))
}

fn split_list(v: &str) -> impl Iterator<Item = &str> {
    v.split(',').map(str::trim).filter(|s| !s.is_empty())
}

fn parse_scenarios(v: &str) -> Result<Vec<Scenario>, ConfigError> {
    let mut out: Vec<Scenario> = Vec::new();
    for item in split_list(v) {
        let id: u8 = parse_num(item, "scenarios")?;
        let s = Scenario::from_id(id).map_err(|e| invalid("scenarios", e.to_string()))?;
        if !out.contains(&s) {
            out.push(s);
        }
    }
    Ok(out)
}
