//! Run artifacts: `trials.jsonl`, `aggregate.csv` and `ttests.csv`.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, BufRead, BufReader};
use std::path::{Path, PathBuf};

use fairrag_core::experiment::{Aggregates, PairwiseTest, TrialRecord};
use thiserror::Error;

/// File name of the per-trial records inside a run directory.
pub const TRIALS_FILE: &str = "trials.jsonl";
/// File name of the per-ranker summaries inside a run directory.
pub const AGGREGATE_FILE: &str = "aggregate.csv";
/// File name of the pairwise significance table.
pub const TTESTS_FILE: &str = "ttests.csv";
/// Snapshot of the resolved configuration inside a run directory.
pub const CONFIG_SNAPSHOT_FILE: &str = "config.txt";

/// Errors reading or writing run artifacts.
#[derive(Debug, Error)]
pub enum OutputError {
    /// Filesystem failure.
    #[error("{path}: {source}")]
    Io {
        /// Path involved.
        path: PathBuf,
        /// Cause.
        source: io::Error,
    },
    /// A JSONL line did not decode into a trial record.
    #[error("{path}:{line}: {source}")]
    Json {
        /// File.
        path: PathBuf,
        /// 1-based line.
        line: usize,
        /// Cause.
        source: serde_json::Error,
    },
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> OutputError + '_ {
    move |source| OutputError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Writes `contents` to a sibling temp file and renames it over `path`.
pub fn atomic_write(path: &Path, contents: &[u8]) -> Result<(), OutputError> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let tmp = dir.join(format!(".{name}.tmp-{}", std::process::id()));
    fs::write(&tmp, contents).map_err(io_err(&tmp))?;
    fs::rename(&tmp, path).map_err(io_err(path))
}

/// One JSON object per line, in record order.
pub fn trials_jsonl(records: &[TrialRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("trial records always serialize"));
        out.push('\n');
    }
    out
}

/// Reads records written by [`trials_jsonl`]; blank lines are skipped.
pub fn read_trials(path: &Path) -> Result<Vec<TrialRecord>, OutputError> {
    let file = fs::File::open(path).map_err(io_err(path))?;
    let mut records = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        if line.trim().is_empty() {
            continue;
        }
        let record = serde_json::from_str(&line).map_err(|source| OutputError::Json {
            path: path.to_path_buf(),
            line: i + 1,
            source,
        })?;
        records.push(record);
    }
    Ok(records)
}

/// Loads and concatenates `trials.jsonl` from each run directory.
pub fn read_runs(run_dirs: &[PathBuf]) -> Result<Vec<TrialRecord>, OutputError> {
    let mut all = Vec::new();
    for dir in run_dirs {
        all.extend(read_trials(&dir.join(TRIALS_FILE))?);
    }
    Ok(all)
}

/// `ranker,metric,n,mean,std,outliers`; metrics without statistics get `n = 0`
/// and empty mean/std.
pub fn aggregate_csv(aggregates: &Aggregates) -> String {
    let mut out = String::from("ranker,metric,n,mean,std,outliers\n");
    for r in &aggregates.rankers {
        for m in &r.metrics {
            match m.stats {
                Some(s) => {
                    let _ = writeln!(
                        out,
                        "{},{},{},{},{},{}",
                        r.ranker, m.metric, s.n, s.mean, s.std, s.outlier_count
                    );
                }
                None => {
                    let _ = writeln!(out, "{},{},0,,,0", r.ranker, m.metric);
                }
            }
        }
    }
    out
}

/// `metric,ranker_a,ranker_b,t,df,critical_t,significant` with t values to 4 decimals.
pub fn ttests_csv(tests: &[PairwiseTest]) -> String {
    let mut out = String::from("metric,ranker_a,ranker_b,t,df,critical_t,significant\n");
    for t in tests {
        let _ = writeln!(
            out,
            "{},{},{},{:.4},{},{:.4},{}",
            t.metric, t.ranker_a, t.ranker_b, t.result.t_value, t.result.df, t.result.critical_t, t.result.significant
        );
    }
    out
}
