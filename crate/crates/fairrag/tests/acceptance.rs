//! Acceptance suite. Every criterion prints one `PASS`/`FAIL` line on stdout
//! (bypassing the test harness capture) before asserting.

use std::collections::HashMap;
use std::io::Write as _;
use std::time::Instant;

use fairrag::config::{ExperimentConfig, GeneratorConfig, ScorerConfig};
use fairrag::output::TRIALS_FILE;
use fairrag::runner::{run_to_dir, run_with};
use fairrag_core::corpus::{Corpus, Document, GroupLabel};
use fairrag_core::experiment::{aggregate, compare, Metric, SimulatedGenerator, TrialRecord};
use fairrag_core::generation::GeneratorSimParams;
use fairrag_core::metrics::exposure_share_of_groups;
use fairrag_core::ranking::{exposure_weight, plackett_luce_sample, rank_forced_exposure, ForcedExposureParams};
use fairrag_core::relevance::{CandidatePool, ScoreRange, SyntheticScorer};
use fairrag_core::stats::{critical_t, t_test, SummaryStats};
use fairrag_core::trial_rng;
use rand::{Rng, SeedableRng};

fn verdict(id: u32, name: &str, pass: bool, detail: &str) {
    let line = format!(
        "acceptance {id:>2} [{}] {name}: {detail}\n",
        if pass { "PASS" } else { "FAIL" }
    );
    // write straight to the process stdout so the line survives capture
    let _ = std::io::stdout().lock().write_all(line.as_bytes());
    assert!(pass, "criterion {id} ({name}) failed: {detail}");
}

// ---------------------------------------------------------------------------
// Reference summary rows (n = 80 per ranker) and the |t| values reported for them.

const N: usize = 80;
const RANKERS: [&str; 4] = ["standard", "stochastic", "forced", "representative"];
// (mean, std) per ranker, in RANKERS order
const DISPARITY: [(f64, f64); 4] = [(0.4188, 0.1413), (0.4077, 0.0741), (0.2517, 0.1017), (0.0430, 0.0638)];
const SHARE: [(f64, f64); 4] = [(0.1250, 0.2349), (0.0941, 0.0763), (0.2921, 0.1753), (0.5229, 0.0736)];
// reported |t| keyed by unordered ranker pair
const REPORTED_DISPARITY: [((usize, usize), f64); 6] = [
    ((0, 3), 21.6780),
    ((0, 2), 8.5846),
    ((1, 2), 11.0921),
    ((1, 3), 33.3707),
    ((2, 3), 15.5539),
    ((0, 1), 0.6223),
];
const REPORTED_SHARE: [((usize, usize), f64); 6] = [
    ((0, 3), 14.4573),
    ((0, 2), 5.0990),
    ((1, 2), 9.2631),
    ((1, 3), 36.1970),
    ((2, 3), 10.8597),
    ((0, 1), 0.2653),
];

fn summary((mean, std): (f64, f64)) -> SummaryStats {
    SummaryStats {
        n: N,
        mean,
        std,
        outlier_count: 0,
    }
}

#[test]
fn criterion_01_t_value_reproduction() {
    let start = Instant::now();
    let mut misses = Vec::new();
    let mut worst: f64 = 0.0;
    for (metric, rows, reported) in [
        ("disparity", DISPARITY, REPORTED_DISPARITY),
        ("share", SHARE, REPORTED_SHARE),
    ] {
        for ((a, b), expected) in reported {
            let t = t_test(&summary(rows[a]), &summary(rows[b]), 0.01)
                .unwrap()
                .t_value
                .abs();
            let err = (t - expected).abs();
            worst = worst.max(err);
            if err > 0.01 {
                misses.push(format!("{metric} {}-{}: {t:.4} vs {expected}", RANKERS[a], RANKERS[b]));
            }
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    let pass = misses.is_empty() && elapsed < 1.0;
    let detail = if misses.is_empty() {
        format!("12/12 within 0.01 (worst {worst:.4}) in {elapsed:.3}s")
    } else {
        format!("{}/12 within 0.01; off: {}", 12 - misses.len(), misses.join("; "))
    };
    verdict(1, "t-value reproduction", pass, &detail);
}

#[test]
fn criterion_02_critical_value_and_significance() {
    let start = Instant::now();
    let crit = critical_t(158, 0.01).unwrap();
    let mut ok = (crit - 2.6073).abs() <= 0.0005;
    let mut detail = format!("critical_t(158, 0.01) = {crit:.4}");
    for (metric, rows) in [("disparity", DISPARITY), ("share", SHARE)] {
        let significant: Vec<(usize, usize)> = (0..4)
            .flat_map(|i| (i + 1..4).map(move |j| (i, j)))
            .filter(|&(i, j)| {
                let r = t_test(&summary(rows[i]), &summary(rows[j]), 0.01).unwrap();
                assert_eq!(r.df, 158);
                r.significant
            })
            .collect();
        let pattern = significant.len() == 5 && !significant.contains(&(0, 1));
        ok &= pattern;
        detail.push_str(&format!("; {metric} {}/6 significant", significant.len()));
    }
    ok &= start.elapsed().as_secs_f64() < 1.0;
    verdict(2, "critical value and significance pattern", ok, &detail);
}

// ---------------------------------------------------------------------------
// Plackett-Luce.

fn docs_with(groups: &[GroupLabel]) -> Vec<Document> {
    groups
        .iter()
        .enumerate()
        .map(|(i, g)| Document::new(format!("d{i}"), "T", 1, *g, format!("Person {i}"), "", 100))
        .collect()
}

/// Probability of the ordered prefix `seq` under PL with weights `w`.
fn pl_probability(w: &[f64], seq: &[usize]) -> f64 {
    let mut remaining: f64 = w.iter().sum();
    let mut p = 1.0;
    for &i in seq {
        p *= w[i] / remaining;
        remaining -= w[i];
    }
    p
}

#[test]
fn criterion_03_plackett_luce_oracle() {
    let start = Instant::now();
    let docs = docs_with(&[
        GroupLabel::Protected,
        GroupLabel::NonProtected,
        GroupLabel::Protected,
        GroupLabel::NonProtected,
    ]);
    let raw = [0.9, 0.6, 0.35, 0.1];
    let pool = CandidatePool::from_scored("q", docs.iter().zip(raw).collect(), 50).unwrap();
    // weights from the normalized scores, max-shifted
    let norm: Vec<f64> = pool.candidates().iter().map(|c| c.norm_score).collect();
    let max = norm.iter().cloned().fold(f64::MIN, f64::max);
    let w: Vec<f64> = norm.iter().map(|s| (1.0 * (s - max)).exp()).collect();
    let ids: Vec<&str> = pool.candidates().iter().map(|c| c.doc_id()).collect();

    let draws = 100_000;
    let mut counts: HashMap<Vec<String>, usize> = HashMap::new();
    let mut rng = trial_rng(2024);
    for _ in 0..draws {
        let list = plackett_luce_sample(&pool, 2, 1.0, &mut rng).unwrap();
        *counts
            .entry(list.doc_ids().iter().map(|s| s.to_string()).collect())
            .or_default() += 1;
    }
    let mut worst: f64 = 0.0;
    let mut total_p = 0.0;
    for a in 0..4 {
        for b in 0..4 {
            if a == b {
                continue;
            }
            let p = pl_probability(&w, &[a, b]);
            total_p += p;
            let key = vec![ids[a].to_string(), ids[b].to_string()];
            let freq = counts.get(&key).copied().unwrap_or(0) as f64 / draws as f64;
            worst = worst.max((freq - p).abs());
        }
    }
    assert!((total_p - 1.0).abs() < 1e-12);
    let elapsed = start.elapsed().as_secs_f64();
    verdict(
        3,
        "Plackett-Luce oracle equivalence",
        worst <= 0.02 && elapsed < 10.0,
        &format!("12 rankings, max |freq - p| = {worst:.4} over {draws} draws in {elapsed:.2}s"),
    );
}

#[test]
fn criterion_04_concentration_limit() {
    let docs = docs_with(&[
        GroupLabel::Protected,
        GroupLabel::NonProtected,
        GroupLabel::Protected,
        GroupLabel::NonProtected,
        GroupLabel::Protected,
    ]);
    let raw = [0.9, 0.7, 0.5, 0.3, 0.1];
    let pool = CandidatePool::from_scored("q", docs.iter().zip(raw).collect(), 50).unwrap();
    let expected = ["d0", "d1", "d2", "d3", "d4"];
    let hits = (0..1000u64)
        .filter(|&seed| {
            let mut rng = trial_rng(seed);
            plackett_luce_sample(&pool, 5, 50.0, &mut rng).unwrap().doc_ids() == expected
        })
        .count();
    verdict(
        4,
        "concentration limit (alpha = 50)",
        hits >= 990,
        &format!("{hits}/1000 trials reproduce the standard ranking"),
    );
}

// ---------------------------------------------------------------------------
// Skewed synthetic corpus: 20 topics, 25 protected and 25 non-protected
// documents each; protected scores ~ U(0, 0.5), non-protected ~ U(0.5, 1).

const TOPICS: usize = 20;
const PER_GROUP: usize = 25;

fn skewed_corpus() -> Corpus {
    let mut docs = Vec::new();
    for t in 0..TOPICS {
        for i in 0..2 * PER_GROUP {
            let group = if i % 2 == 0 {
                GroupLabel::Protected
            } else {
                GroupLabel::NonProtected
            };
            docs.push(Document::new(
                format!("t{t:02}-d{i:02}"),
                format!("Topic {t:02}"),
                t as u32 + 1,
                group,
                format!("Person {t:02}-{i:02}"),
                "A short biography.",
                100,
            ));
        }
    }
    Corpus::from_documents(docs).unwrap()
}

fn skewed_scorer() -> SyntheticScorer {
    SyntheticScorer::skewed(17, ScoreRange::new(0.0, 0.5), ScoreRange::new(0.5, 1.0))
}

fn skewed_config(rankers: &[&str], trials: usize, generator: GeneratorSimParams) -> ExperimentConfig {
    let mut c = ExperimentConfig::new("unused.csv");
    c.rankers = rankers.iter().map(|s| s.to_string()).collect();
    c.trials = trials;
    c.base_seed = 1000;
    c.generator = GeneratorConfig::Simulated(generator);
    c
}

fn run_skewed(rankers: &[&str], trials: usize, generator: GeneratorSimParams) -> Vec<TrialRecord> {
    let corpus = skewed_corpus();
    let config = skewed_config(rankers, trials, generator);
    run_with(&config, &corpus, &skewed_scorer(), &SimulatedGenerator(generator)).unwrap()
}

fn mean_of(records: &[TrialRecord], ranker: &str, metric: Metric) -> f64 {
    let values: Vec<f64> = records
        .iter()
        .filter(|r| r.ranker == ranker)
        .filter_map(|r| metric.value(r))
        .collect();
    values.iter().sum::<f64>() / values.len() as f64
}

fn skewed_means() -> (Vec<TrialRecord>, HashMap<&'static str, (f64, f64)>) {
    let records = run_skewed(&RANKERS, 500, GeneratorSimParams::default());
    let means = RANKERS
        .iter()
        .map(|r| {
            (
                *r,
                (
                    mean_of(&records, r, Metric::ExposureShare),
                    mean_of(&records, r, Metric::ExposureDisparity),
                ),
            )
        })
        .collect();
    (records, means)
}

#[test]
fn criterion_05_representative_parity_convergence() {
    let start = Instant::now();
    let (records, m) = skewed_means();
    assert_eq!(records.len(), 4 * 500);
    let (share, disparity) = m["representative"];
    let pass = (0.45..=0.55).contains(&share)
        && disparity < m["standard"].1
        && disparity < m["stochastic"].1
        && start.elapsed().as_secs_f64() < 60.0;
    verdict(
        5,
        "representative parity convergence",
        pass,
        &format!(
            "share {share:.4}, disparity {disparity:.4} vs standard {:.4}, stochastic {:.4} (500 trials)",
            m["standard"].1, m["stochastic"].1
        ),
    );
}

#[test]
fn criterion_06_disparity_ordering() {
    let (_, m) = skewed_means();
    let d = |r: &str| m[r].1;
    let pass = d("representative") < d("forced") && d("forced") < d("standard").min(d("stochastic"));
    verdict(
        6,
        "ranker disparity ordering",
        pass,
        &format!(
            "representative {:.4} < forced {:.4} < min(standard {:.4}, stochastic {:.4})",
            d("representative"),
            d("forced"),
            d("standard"),
            d("stochastic")
        ),
    );
}

// ---------------------------------------------------------------------------

#[test]
fn criterion_07_forced_exposure_quota() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    let mut violations = 0;
    let pools = 10_000;
    for _ in 0..pools {
        let k = rng.random_range(1..=10usize);
        let min = k / 2;
        // feasible: both groups hold at least floor(k/2) members
        let protected = rng.random_range(min..=min + 6);
        let non_protected = rng.random_range(min.max(k.saturating_sub(protected))..=min + 6);
        let mut groups = vec![GroupLabel::Protected; protected];
        groups.extend(vec![GroupLabel::NonProtected; non_protected]);
        let docs = docs_with(&groups);
        let scores: Vec<f64> = (0..docs.len()).map(|_| rng.random::<f64>()).collect();
        let pool = CandidatePool::from_scored("q", docs.iter().zip(scores).collect(), 50).unwrap();
        let out = rank_forced_exposure(&pool, k, ForcedExposureParams::default()).unwrap();
        if out.list.protected_count() < min || !out.is_feasible() {
            violations += 1;
        }
    }

    let f = GroupLabel::Protected;
    let m = GroupLabel::NonProtected;
    let trace_docs = [
        Document::new("F0.9", "T", 1, f, "F0.9", "", 100),
        Document::new("F0.4", "T", 1, f, "F0.4", "", 100),
        Document::new("M0.8", "T", 1, m, "M0.8", "", 100),
        Document::new("M0.7", "T", 1, m, "M0.7", "", 100),
        Document::new("M0.6", "T", 1, m, "M0.6", "", 100),
    ];
    let trace_pool =
        CandidatePool::from_scored("q", trace_docs.iter().zip([0.9, 0.4, 0.8, 0.7, 0.6]).collect(), 50).unwrap();
    let trace = rank_forced_exposure(&trace_pool, 4, ForcedExposureParams::with_min(2)).unwrap();
    let trace_ok = trace.list.doc_ids() == ["F0.9", "M0.8", "M0.7", "F0.4"];

    verdict(
        7,
        "forced-exposure quota",
        violations == 0 && trace_ok,
        &format!(
            "{violations} violations in {pools} feasible pools; hand trace -> {:?}",
            trace.list.doc_ids()
        ),
    );
}

#[test]
fn criterion_08_retrieval_to_generation_propagation() {
    let unbiased = GeneratorSimParams {
        num_citations: 1,
        position_bias_beta: 1.0,
        group_bias_b: 0.0,
        hallucination_prob_h: 0.0,
    };
    let records = run_skewed(&RANKERS, 10_000, unbiased);
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for r in RANKERS {
        let share = mean_of(&records, r, Metric::ExposureShare);
        let parity = mean_of(&records, r, Metric::GenerationParity);
        worst = worst.max((share - parity).abs());
        parts.push(format!("{r} {share:.4}/{parity:.4}"));
    }
    verdict(
        8,
        "retrieval-to-generation propagation",
        worst <= 0.03,
        &format!("share/parity: {}; max gap {worst:.4}", parts.join(", ")),
    );
}

#[test]
fn criterion_09_utility_contract() {
    let exact = GeneratorSimParams::default();
    let exact_records = run_skewed(&["stochastic"], 1000, exact);
    let all_one = exact_records
        .iter()
        .all(|r| r.generation.as_ref().is_some_and(|g| g.utility == 1.0));

    let noisy = GeneratorSimParams {
        hallucination_prob_h: 0.2,
        ..exact
    };
    let noisy_records = run_skewed(&["stochastic"], 10_000, noisy);
    let mean = mean_of(&noisy_records, "stochastic", Metric::Utility);
    verdict(
        9,
        "utility contract",
        all_one && (mean - 0.8).abs() <= 0.02,
        &format!("h=0 all trials utility 1.0: {all_one}; h=0.2 mean utility {mean:.4} over 10000 trials"),
    );
}

#[test]
fn criterion_10_end_to_end_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let corpus_path = dir.path().join("corpus.csv");
    fairrag::corpus_io::write_corpus(&skewed_corpus(), &corpus_path).unwrap();

    let mut config = skewed_config(&RANKERS, 40, GeneratorSimParams::default());
    config.corpus = corpus_path;
    config.scorer = ScorerConfig::Synthetic {
        seed: 17,
        protected: ScoreRange::new(0.0, 0.5),
        non_protected: ScoreRange::new(0.5, 1.0),
    };
    config.workers = 1;
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    run_to_dir(&config, &a).unwrap();
    config.workers = 4;
    run_to_dir(&config, &b).unwrap();
    let bytes_a = std::fs::read(a.join(TRIALS_FILE)).unwrap();
    let bytes_b = std::fs::read(b.join(TRIALS_FILE)).unwrap();
    verdict(
        10,
        "end-to-end determinism",
        !bytes_a.is_empty() && bytes_a == bytes_b,
        &format!(
            "{} bytes, identical across 1 and 4 workers: {}",
            bytes_a.len(),
            bytes_a == bytes_b
        ),
    );
}

#[test]
fn criterion_11_metric_identities() {
    let runs = [
        run_skewed(&RANKERS, 200, GeneratorSimParams::default()),
        run_skewed(
            &RANKERS,
            200,
            GeneratorSimParams {
                group_bias_b: 0.5,
                hallucination_prob_h: 0.1,
                ..GeneratorSimParams::default()
            },
        ),
    ];
    let mut checked = 0;
    let mut broken = Vec::new();
    for records in &runs {
        for r in records {
            checked += 1;
            let share = r.retrieval.exposure_share_protected;
            if (r.retrieval.exposure_disparity - (share - 0.5).abs()).abs() > 1e-12 {
                broken.push(format!("trial {} {}: disparity", r.trial_id, r.ranker));
            }
            let groups = r.groups();
            let recomputed = exposure_share_of_groups(&groups).unwrap();
            let flipped: Vec<GroupLabel> = groups.iter().map(|g| g.flipped()).collect();
            let other = exposure_share_of_groups(&flipped).unwrap();
            if (recomputed - share).abs() > 1e-12 || (recomputed + other - 1.0).abs() > 1e-12 {
                broken.push(format!("trial {} {}: share flip", r.trial_id, r.ranker));
            }
            // the share is a weighted protected fraction
            let total: f64 = (1..=groups.len()).map(exposure_weight).sum();
            let prot: f64 = groups
                .iter()
                .enumerate()
                .filter(|(_, g)| g.is_protected())
                .map(|(i, _)| exposure_weight(i + 1))
                .sum();
            if (prot / total - share).abs() > 1e-12 {
                broken.push(format!("trial {} {}: share formula", r.trial_id, r.ranker));
            }
        }
        let agg = aggregate(records, 3.0).unwrap();
        for r in &agg.rankers {
            let s = r.metric(Metric::ExposureShare).unwrap().stats.unwrap();
            let d = r.metric(Metric::ExposureDisparity).unwrap().stats.unwrap();
            if d.mean + 1e-12 < (s.mean - 0.5).abs() {
                broken.push(format!("{}: Jensen", r.ranker));
            }
        }
        // comparisons run over every pair without error
        assert_eq!(compare(&agg, Metric::ExposureDisparity, 0.01).unwrap().len(), 6);
    }
    verdict(
        11,
        "metric identities",
        broken.is_empty(),
        &format!(
            "{checked} trials across 2 runs, {} violations {:?}",
            broken.len(),
            broken
        ),
    );
}
