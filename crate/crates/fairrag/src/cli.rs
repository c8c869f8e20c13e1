//! Command-line interface: `ingest`, `run`, `analyze`, `report`.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 usage or validation error.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use fairrag_core::experiment::{aggregate, compare, Aggregates, Metric};
use fairrag_core::stats::DEFAULT_OUTLIER_Z;

use crate::config::ExperimentConfig;
use crate::corpus_io::{load_corpus, write_corpus, CorpusCounts};
use crate::output::{atomic_write, read_runs, ttests_csv, OutputError, TRIALS_FILE, TTESTS_FILE};
use crate::report::{report_csv, report_svg, ReportFormat};
use crate::runner::run_to_dir;

/// Success.
pub const EXIT_OK: i32 = 0;
/// Runtime failure.
pub const EXIT_RUNTIME: i32 = 1;
/// Usage or validation failure.
pub const EXIT_USAGE: i32 = 2;

/// Fairness-aware retrieval experiments for RAG pipelines.
#[derive(Debug, Parser)]
#[command(name = "fairrag", version, about)]
pub struct Cli {
    /// Subcommand.
    #[command(subcommand)]
    pub command: Command,
}

/// Subcommands.
#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate and truncate a corpus CSV, writing it in canonical form.
    Ingest {
        /// Input corpus CSV.
        #[arg(long)]
        corpus: PathBuf,
        /// Directory of `<doc_id>.txt` files replacing the CSV text.
        #[arg(long)]
        overrides: Option<PathBuf>,
        /// Word limit per document.
        #[arg(long, default_value_t = fairrag_core::corpus::DEFAULT_TRUNCATION_LIMIT)]
        truncate: usize,
        /// Output CSV.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run an experiment and write trials.jsonl and aggregate.csv.
    Run {
        /// Config file.
        #[arg(long)]
        config: PathBuf,
        /// Ranker name (or comma-separated list), overriding the config.
        #[arg(long)]
        ranker: Option<String>,
        /// Base seed, overriding the config.
        #[arg(long)]
        seed: Option<u64>,
        /// Run directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Pairwise t-tests between the rankers of several runs.
    Analyze {
        /// Run directories (at least two).
        #[arg(long, num_args = 1.., required = true)]
        runs: Vec<PathBuf>,
        /// exposure_disparity, exposure_share, generation_parity or utility.
        #[arg(long)]
        metric: String,
        /// Two-tailed significance level (0.01 or 0.05).
        #[arg(long, default_value_t = 0.01)]
        alpha: f64,
    },
    /// Grouped-bar chart of metric means (SVG or CSV by extension).
    Report {
        /// Run directories.
        #[arg(long, num_args = 1.., required = true)]
        runs: Vec<PathBuf>,
        /// Output path ending in .svg or .csv.
        #[arg(long)]
        out: PathBuf,
    },
}

/// A failure with its exit code.
#[derive(Debug)]
pub struct CliError {
    /// Process exit code.
    pub code: i32,
    /// Message for stderr.
    pub message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    fn runtime(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_RUNTIME,
            message: message.into(),
        }
    }
}

fn write_err(e: OutputError) -> CliError {
    CliError::runtime(e.to_string())
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run_cli<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            let _ = if code == EXIT_OK {
                write!(stdout, "{rendered}")
            } else {
                write!(stderr, "{rendered}")
            };
            return code;
        }
    };
    match execute(cli.command) {
        Ok(text) => {
            let _ = write!(stdout, "{text}");
            EXIT_OK
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {}", e.message);
            e.code
        }
    }
}

/// Runs a parsed command, returning what it prints on success.
pub fn execute(command: Command) -> Result<String, CliError> {
    match command {
        Command::Ingest {
            corpus,
            overrides,
            truncate,
            out,
        } => ingest(&corpus, overrides.as_deref(), truncate, &out),
        Command::Run {
            config,
            ranker,
            seed,
            out,
        } => run(&config, ranker.as_deref(), seed, &out),
        Command::Analyze { runs, metric, alpha } => analyze(&runs, &metric, alpha),
        Command::Report { runs, out } => report(&runs, &out),
    }
}

fn ingest(corpus: &Path, overrides: Option<&Path>, truncate: usize, out: &Path) -> Result<String, CliError> {
    let loaded = load_corpus(corpus, truncate, overrides).map_err(|e| CliError::usage(e.to_string()))?;
    write_corpus(&loaded, out).map_err(write_err)?;
    Ok(format!("{}\n", CorpusCounts::of(&loaded)))
}

fn run(config_path: &Path, ranker: Option<&str>, seed: Option<u64>, out: &Path) -> Result<String, CliError> {
    let mut config = ExperimentConfig::load(config_path).map_err(|e| CliError::usage(e.to_string()))?;
    if let Some(r) = ranker {
        config.rankers = r
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(str::to_owned)
            .collect();
    }
    if let Some(s) = seed {
        config.base_seed = s;
    }
    config.validate().map_err(|e| CliError::usage(e.to_string()))?;
    let output = run_to_dir(&config, out).map_err(|e| {
        if e.is_validation() {
            CliError::usage(e.to_string())
        } else {
            CliError::runtime(e.to_string())
        }
    })?;
    Ok(summary_lines(&output.aggregates))
}

/// One line per ranker with the mean of every metric.
pub fn summary_lines(aggregates: &Aggregates) -> String {
    let mut out = String::new();
    for r in &aggregates.rankers {
        let _ = write!(out, "{}: trials={} failed={}", r.ranker, r.trials, r.failed);
        for m in &r.metrics {
            match m.stats {
                Some(s) => {
                    let _ = write!(out, " {}={:.4}", m.metric, s.mean);
                }
                None => {
                    let _ = write!(out, " {}=NA", m.metric);
                }
            }
        }
        out.push('\n');
    }
    out
}

fn load_aggregates(runs: &[PathBuf]) -> Result<Aggregates, CliError> {
    for dir in runs {
        if !dir.join(TRIALS_FILE).is_file() {
            return Err(CliError::usage(format!("{}: no {TRIALS_FILE} found", dir.display())));
        }
    }
    let records = read_runs(runs).map_err(|e| CliError::usage(e.to_string()))?;
    aggregate(&records, DEFAULT_OUTLIER_Z).map_err(|e| CliError::usage(e.to_string()))
}

fn analyze(runs: &[PathBuf], metric: &str, alpha: f64) -> Result<String, CliError> {
    if runs.len() < 2 {
        return Err(CliError::usage(format!(
            "analyze needs at least 2 run directories, got {}",
            runs.len()
        )));
    }
    let metric = Metric::from_name(metric).ok_or_else(|| CliError::usage(format!("unknown metric `{metric}`")))?;
    let aggregates = load_aggregates(runs)?;
    let tests = compare(&aggregates, metric, alpha).map_err(|e| CliError::usage(e.to_string()))?;
    let csv = ttests_csv(&tests);
    let parent = runs[0]
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let path = parent.join(TTESTS_FILE);
    atomic_write(&path, csv.as_bytes()).map_err(write_err)?;

    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<16} {:<16} {:>10} {:>5} {:>8} significant",
        "ranker_a", "ranker_b", "t", "df", "crit"
    );
    for t in &tests {
        let _ = writeln!(
            out,
            "{:<16} {:<16} {:>10.4} {:>5} {:>8.4} {}",
            t.ranker_a, t.ranker_b, t.result.t_value, t.result.df, t.result.critical_t, t.result.significant
        );
    }
    let _ = writeln!(out, "wrote {}", path.display());
    Ok(out)
}

fn report(runs: &[PathBuf], out: &Path) -> Result<String, CliError> {
    let format = ReportFormat::from_path(out)
        .ok_or_else(|| CliError::usage(format!("{}: output must end in .svg or .csv", out.display())))?;
    let aggregates = load_aggregates(runs)?;
    let body = match format {
        ReportFormat::Svg => report_svg(&aggregates),
        ReportFormat::Csv => report_csv(&aggregates),
    };
    atomic_write(out, body.as_bytes()).map_err(write_err)?;
    Ok(format!("wrote {}\n", out.display()))
}
