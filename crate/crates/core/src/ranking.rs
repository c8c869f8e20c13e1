//! Top-k rankers and the exposure model they share.
//!
//! Four strategies are provided:
//!
//! | name             | function                           | randomized |
//! |------------------|------------------------------------|------------|
//! | `standard`       | [`rank_standard`]                  | no         |
//! | `stochastic`     | [`plackett_luce_sample`]           | yes        |
//! | `forced`         | [`rank_forced_exposure`]           | no         |
//! | `representative` | [`rank_representative_stochastic`] | yes        |
//!
//! Exposure at 1-based position `p` is `1 / log2(p + 1)`.

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::Rng;
use thiserror::Error;

use crate::corpus::GroupLabel;
use crate::relevance::{by_score_then_id, CandidatePool, ScoredCandidate};
use crate::sampling::weighted_index;

/// Default context size.
pub const DEFAULT_K: usize = 5;
/// Default Plackett-Luce concentration for the Stochastic ranker.
pub const DEFAULT_ALPHA: f64 = 5.0;
/// Default target protected exposure share.
pub const DEFAULT_TAU: f64 = 0.5;
/// Default gain applied to the exposure deficit.
pub const DEFAULT_GAMMA: f64 = 2.0;
/// Upper bound on the additive fairness correction.
pub const CORRECTION_CAP: f64 = 1.0;
/// Floor on sampling weights so zero-relevance candidates stay drawable.
pub const WEIGHT_FLOOR: f64 = 1e-9;

/// Errors raised by the rankers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum RankingError {
    /// The candidate pool has no candidates.
    #[error("candidate pool is empty")]
    EmptyPool,
    /// `k` was zero.
    #[error("k must be at least 1")]
    ZeroK,
    /// A parameter is outside its domain.
    #[error("invalid ranker parameter: {0}")]
    InvalidParams(&'static str),
    /// Unrecognized ranker name.
    #[error("unknown ranker `{0}` (expected standard, stochastic, forced or representative)")]
    UnknownRanker(alloc::string::String),
}

/// Exposure weight of a 1-based rank position: `1 / log2(position + 1)`.
///
/// # Panics
///
/// Panics if `position` is 0.
pub fn exposure_weight(position: usize) -> f64 {
    assert!(position >= 1, "positions are 1-based");
    1.0 / libm::log2(position as f64 + 1.0)
}

/// One filled position of a ranked list.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankedEntry<'a> {
    /// 1-based rank.
    pub position: usize,
    /// The ranked candidate.
    pub candidate: ScoredCandidate<'a>,
}

/// An ordered top-k list with contiguous 1-based positions.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedList<'a> {
    entries: Vec<RankedEntry<'a>>,
    k: usize,
}

impl<'a> RankedList<'a> {
    /// Assigns positions `1..=len` to `candidates` in order.
    pub fn from_candidates(k: usize, candidates: Vec<ScoredCandidate<'a>>) -> Self {
        debug_assert!(candidates.len() <= k);
        let entries = candidates
            .into_iter()
            .enumerate()
            .map(|(i, candidate)| RankedEntry {
                position: i + 1,
                candidate,
            })
            .collect();
        Self { entries, k }
    }

    /// Entries in rank order.
    pub fn entries(&self) -> &[RankedEntry<'a>] {
        &self.entries
    }

    /// Requested list length.
    pub fn k(&self) -> usize {
        self.k
    }

    /// Number of filled positions.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    /// Whether no position is filled.
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Groups in rank order.
    pub fn groups(&self) -> Vec<GroupLabel> {
        self.entries.iter().map(|e| e.candidate.group()).collect()
    }

    /// Document ids in rank order.
    pub fn doc_ids(&self) -> Vec<&'a str> {
        self.entries.iter().map(|e| e.candidate.doc_id()).collect()
    }

    /// Number of protected entries.
    pub fn protected_count(&self) -> usize {
        protected_count(self)
    }
}

/// Number of entries in `list` whose group is protected.
pub fn protected_count(list: &RankedList<'_>) -> usize {
    list.entries
        .iter()
        .filter(|e| e.candidate.group().is_protected())
        .count()
}

fn check_inputs(pool: &CandidatePool<'_>, k: usize) -> Result<usize, RankingError> {
    if pool.is_empty() {
        return Err(RankingError::EmptyPool);
    }
    if k == 0 {
        return Err(RankingError::ZeroK);
    }
    Ok(k.min(pool.len()))
}

/// Deterministic top-k by descending normalized score, ties by ascending `doc_id`.
pub fn rank_standard<'a>(pool: &CandidatePool<'a>, k: usize) -> Result<RankedList<'a>, RankingError> {
    let len = check_inputs(pool, k)?;
    let mut sorted = pool.candidates().to_vec();
    sorted.sort_by(|a, b| by_score_then_id(a.norm_score, a.doc_id(), b.norm_score, b.doc_id()));
    sorted.truncate(len);
    Ok(RankedList::from_candidates(k, sorted))
}

/// Plackett-Luce concentration parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StochasticParams {
    /// `alpha = 0` samples uniformly; large values approach [`rank_standard`].
    pub alpha: f64,
}

impl Default for StochasticParams {
    fn default() -> Self {
        Self { alpha: DEFAULT_ALPHA }
    }
}

/// Samples a top-k list without replacement; at each step candidate `i` is
/// drawn with probability proportional to `exp(alpha * norm_score_i)` among
/// the candidates not yet placed.
pub fn plackett_luce_sample<'a, R: Rng + ?Sized>(
    pool: &CandidatePool<'a>,
    k: usize,
    alpha: f64,
    rng: &mut R,
) -> Result<RankedList<'a>, RankingError> {
    let len = check_inputs(pool, k)?;
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(RankingError::InvalidParams("alpha must be finite and non-negative"));
    }
    let mut remaining = pool.candidates().to_vec();
    let mut chosen = Vec::with_capacity(len);
    let mut weights = Vec::with_capacity(remaining.len());
    for _ in 0..len {
        // Shifting by the max score leaves the ratios unchanged and keeps exp() finite.
        let top = remaining.iter().map(|c| c.norm_score).fold(f64::NEG_INFINITY, f64::max);
        weights.clear();
        weights.extend(remaining.iter().map(|c| libm::exp(alpha * (c.norm_score - top))));
        let pick = weighted_index(&weights, rng);
        chosen.push(remaining.remove(pick));
    }
    Ok(RankedList::from_candidates(k, chosen))
}

/// Per-group minimum for [`rank_forced_exposure`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ForcedExposureParams {
    /// Minimum count per group; `None` means `floor(k / 2)`.
    pub min_per_group: Option<usize>,
}

impl ForcedExposureParams {
    /// Explicit per-group minimum.
    pub fn with_min(min_per_group: usize) -> Self {
        Self {
            min_per_group: Some(min_per_group),
        }
    }

    /// Effective minimum for a given `k`, checking `2 * min <= k`.
    pub fn resolve(&self, k: usize) -> Result<usize, RankingError> {
        let min = self.min_per_group.unwrap_or(k / 2);
        if min.saturating_mul(2) > k {
            return Err(RankingError::InvalidParams("2 * min_per_group must not exceed k"));
        }
        Ok(min)
    }
}

/// Output of [`rank_forced_exposure`]: the list plus quota bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct ForcedExposure<'a> {
    /// The constructed list.
    pub list: RankedList<'a>,
    /// Requested per-group minimum.
    pub min_per_group: usize,
    /// Whether the protected minimum was reached.
    pub protected_quota_met: bool,
    /// Whether the non-protected minimum was reached.
    pub non_protected_quota_met: bool,
}

impl ForcedExposure<'_> {
    /// True when both quotas were reached.
    pub fn is_feasible(&self) -> bool {
        self.protected_quota_met && self.non_protected_quota_met
    }
}

/// Rebuilds the top-k position by position so that each group reaches
/// `min_per_group` where its pool allows.
///
/// Each group keeps its pool order. At every slot, a group whose outstanding
/// quota equals the remaining slot count is forced; otherwise the better
/// scoring group head wins, with ties going to the protected head. A group
/// that runs out of candidates has its quota reduced to what it supplied.
pub fn rank_forced_exposure<'a>(
    pool: &CandidatePool<'a>,
    k: usize,
    params: ForcedExposureParams,
) -> Result<ForcedExposure<'a>, RankingError> {
    let len = check_inputs(pool, k)?;
    let min = params.resolve(k)?;

    let (protected, non_protected): (Vec<_>, Vec<_>) = pool
        .candidates()
        .iter()
        .copied()
        .partition(|c| c.group().is_protected());
    let quota_p = min.min(protected.len());
    let quota_n = min.min(non_protected.len());

    let (mut p_iter, mut n_iter) = (protected.iter().peekable(), non_protected.iter().peekable());
    let (mut taken_p, mut taken_n) = (0usize, 0usize);
    let mut chosen = Vec::with_capacity(len);
    for slot in 0..len {
        let remaining = len - slot;
        let need_p = quota_p.saturating_sub(taken_p);
        let need_n = quota_n.saturating_sub(taken_n);
        let take_protected = match (p_iter.peek(), n_iter.peek()) {
            (Some(_), None) => true,
            (None, Some(_)) => false,
            (Some(p), Some(n)) => {
                if need_p >= remaining {
                    true
                } else if need_n >= remaining {
                    false
                } else {
                    p.norm_score >= n.norm_score
                }
            }
            (None, None) => unreachable!("len never exceeds the pool size"),
        };
        if take_protected {
            chosen.push(*p_iter.next().unwrap());
            taken_p += 1;
        } else {
            chosen.push(*n_iter.next().unwrap());
            taken_n += 1;
        }
    }
    Ok(ForcedExposure {
        list: RankedList::from_candidates(k, chosen),
        min_per_group: min,
        protected_quota_met: taken_p >= min,
        non_protected_quota_met: taken_n >= min,
    })
}

/// Parameters of the Representative Stochastic ranker.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RepresentativeParams {
    /// Target protected exposure share.
    pub tau: f64,
    /// Gain applied to the exposure deficit before capping.
    pub gamma: f64,
    /// Upper bound on the additive correction.
    pub correction_cap: f64,
    /// Restrict to protected candidates once the target becomes unreachable otherwise.
    pub feasibility_guard: bool,
}

impl Default for RepresentativeParams {
    fn default() -> Self {
        Self {
            tau: DEFAULT_TAU,
            gamma: DEFAULT_GAMMA,
            correction_cap: CORRECTION_CAP,
            feasibility_guard: true,
        }
    }
}

impl RepresentativeParams {
    fn validate(&self) -> Result<(), RankingError> {
        if !(0.0..=1.0).contains(&self.tau) {
            return Err(RankingError::InvalidParams("tau must lie in [0, 1]"));
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return Err(RankingError::InvalidParams("gamma must be finite and non-negative"));
        }
        if !(self.correction_cap > 0.0 && self.correction_cap.is_finite()) {
            return Err(RankingError::InvalidParams("correction cap must be positive"));
        }
        Ok(())
    }

    /// Additive corrections `(protected, non_protected)` for an exposure
    /// deficit `tau - share`. Only the under-exposed group gets a boost.
    pub fn corrections(&self, deficit: f64) -> (f64, f64) {
        let boost = |x: f64| (self.gamma * x).clamp(0.0, self.correction_cap);
        if deficit > 0.0 {
            (boost(deficit), 0.0)
        } else if deficit < 0.0 {
            (0.0, boost(-deficit))
        } else {
            (0.0, 0.0)
        }
    }
}

/// Whether the protected target is out of reach even if every position from
/// `next_position` through `len` went to a protected candidate.
///
/// `protected_exposure` is the exposure already held by protected entries in
/// positions `1..next_position`.
pub fn target_unreachable(protected_exposure: f64, next_position: usize, len: usize, tau: f64) -> bool {
    let total: f64 = (1..=len).map(exposure_weight).sum();
    let best_case: f64 = protected_exposure + (next_position..=len).map(exposure_weight).sum::<f64>();
    best_case / total < tau
}

/// Plackett-Luce style sampling with an exposure-tracked fairness correction.
///
/// Before each position the protected share of the partial list's exposure
/// is compared with `tau`. The under-exposed group's candidates get an
/// additive boost `min(gamma * |deficit|, cap)` on top of their normalized
/// score. If the target can no longer be met without it, the draw is limited
/// to protected candidates while any remain.
pub fn rank_representative_stochastic<'a, R: Rng + ?Sized>(
    pool: &CandidatePool<'a>,
    k: usize,
    params: RepresentativeParams,
    rng: &mut R,
) -> Result<RankedList<'a>, RankingError> {
    let len = check_inputs(pool, k)?;
    params.validate()?;

    let mut remaining = pool.candidates().to_vec();
    let mut chosen = Vec::with_capacity(len);
    let mut protected_exposure = 0.0;
    let mut filled_exposure = 0.0;
    let mut eligible = Vec::with_capacity(remaining.len());
    let mut weights = Vec::with_capacity(remaining.len());

    for position in 1..=len {
        let deficit = if filled_exposure > 0.0 {
            params.tau - protected_exposure / filled_exposure
        } else {
            0.0
        };
        let (boost_p, boost_n) = params.corrections(deficit);

        let restrict = params.feasibility_guard
            && remaining.iter().any(|c| c.group().is_protected())
            && target_unreachable(protected_exposure, position, len, params.tau);

        eligible.clear();
        weights.clear();
        for (i, c) in remaining.iter().enumerate() {
            let protected = c.group().is_protected();
            if restrict && !protected {
                continue;
            }
            let boost = if protected { boost_p } else { boost_n };
            eligible.push(i);
            weights.push((c.norm_score + boost).max(WEIGHT_FLOOR));
        }
        let pick = eligible[weighted_index(&weights, rng)];
        let candidate = remaining.remove(pick);

        let w = exposure_weight(position);
        filled_exposure += w;
        if candidate.group().is_protected() {
            protected_exposure += w;
        }
        chosen.push(candidate);
    }
    Ok(RankedList::from_candidates(k, chosen))
}

/// A configured ranking strategy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Ranker {
    /// Deterministic relevance order.
    Standard,
    /// Plackett-Luce sampling.
    Stochastic(StochasticParams),
    /// Group-quota interleaving.
    ForcedExposure(ForcedExposureParams),
    /// Exposure-tracked stochastic sampling.
    RepresentativeStochastic(RepresentativeParams),
}

/// Ranker names accepted by [`Ranker::from_name`], in canonical order.
pub const RANKER_NAMES: [&str; 4] = ["standard", "stochastic", "forced", "representative"];

/// Tunables shared by all rankers; each ranker reads the ones it uses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankerSettings {
    /// Plackett-Luce concentration.
    pub alpha: f64,
    /// Deficit gain.
    pub gamma: f64,
    /// Target protected share.
    pub tau: f64,
    /// Forced-exposure minimum (`None` = `floor(k/2)`).
    pub min_per_group: Option<usize>,
}

impl Default for RankerSettings {
    fn default() -> Self {
        Self {
            alpha: DEFAULT_ALPHA,
            gamma: DEFAULT_GAMMA,
            tau: DEFAULT_TAU,
            min_per_group: None,
        }
    }
}

impl Ranker {
    /// Builds a ranker from its configuration name.
    pub fn from_name(name: &str, settings: &RankerSettings) -> Result<Self, RankingError> {
        match name {
            "standard" => Ok(Self::Standard),
            "stochastic" => Ok(Self::Stochastic(StochasticParams { alpha: settings.alpha })),
            "forced" => Ok(Self::ForcedExposure(ForcedExposureParams {
                min_per_group: settings.min_per_group,
            })),
            "representative" => Ok(Self::RepresentativeStochastic(RepresentativeParams {
                tau: settings.tau,
                gamma: settings.gamma,
                ..RepresentativeParams::default()
            })),
            other => Err(RankingError::UnknownRanker(other.into())),
        }
    }

    /// Configuration name.
    pub fn name(&self) -> &'static str {
        match self {
            Self::Standard => "standard",
            Self::Stochastic(_) => "stochastic",
            Self::ForcedExposure(_) => "forced",
            Self::RepresentativeStochastic(_) => "representative",
        }
    }

    /// Whether the ranker consumes randomness.
    pub fn is_stochastic(&self) -> bool {
        matches!(self, Self::Stochastic(_) | Self::RepresentativeStochastic(_))
    }

    /// Ranks `pool` into a top-`k` list.
    pub fn rank<'a, R: Rng + ?Sized>(
        &self,
        pool: &CandidatePool<'a>,
        k: usize,
        rng: &mut R,
    ) -> Result<RankedList<'a>, RankingError> {
        match self {
            Self::Standard => rank_standard(pool, k),
            Self::Stochastic(p) => plackett_luce_sample(pool, k, p.alpha, rng),
            Self::ForcedExposure(p) => rank_forced_exposure(pool, k, *p).map(|f| f.list),
            Self::RepresentativeStochastic(p) => rank_representative_stochastic(pool, k, *p, rng),
        }
    }
}

impl fmt::Display for Ranker {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Ranker {
    type Err = RankingError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::from_name(s, &RankerSettings::default())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Document;
    use crate::trial_rng;
    use alloc::string::String;
    use alloc::vec;

    fn docs(spec: &[(&str, GroupLabel)]) -> Vec<Document> {
        spec.iter()
            .map(|(id, g)| Document::new(*id, "T", 1, *g, String::from(*id), "", 100))
            .collect()
    }

    fn pool<'a>(docs: &'a [Document], scores: &[f64]) -> CandidatePool<'a> {
        let scored = docs.iter().zip(scores.iter().copied()).collect();
        CandidatePool::from_scored("q", scored, docs.len()).unwrap()
    }

    use GroupLabel::{NonProtected as M, Protected as F};

    #[test]
    fn exposure_weights() {
        assert_eq!(exposure_weight(1), 1.0);
        assert_eq!(exposure_weight(3), 0.5);
        assert!((exposure_weight(7) - 1.0 / 3.0).abs() < 1e-15);
        for p in 1..50 {
            assert!(exposure_weight(p + 1) < exposure_weight(p));
        }
    }

    #[test]
    #[should_panic]
    fn exposure_weight_rejects_zero() {
        exposure_weight(0);
    }

    #[test]
    fn standard_orders_and_breaks_ties() {
        let d = docs(&[("A", F), ("B", M), ("C", F)]);
        let p = pool(&d, &[0.9, 0.7, 0.5]);
        assert_eq!(rank_standard(&p, 2).unwrap().doc_ids(), vec!["A", "B"]);

        let d = docs(&[("B", F), ("A", M)]);
        let p = pool(&d, &[0.9, 0.9]);
        assert_eq!(rank_standard(&p, 2).unwrap().doc_ids(), vec!["A", "B"]);

        let d = docs(&[("A", F), ("B", M), ("C", F)]);
        let p = pool(&d, &[0.9, 0.7, 0.5]);
        let list = rank_standard(&p, 5).unwrap();
        assert_eq!(list.len(), 3);
        let positions: Vec<usize> = list.entries().iter().map(|e| e.position).collect();
        assert_eq!(positions, vec![1, 2, 3]);
    }

    #[test]
    fn zero_k_rejected() {
        let d = docs(&[("A", F)]);
        let p = pool(&d, &[1.0]);
        assert_eq!(rank_standard(&p, 0).unwrap_err(), RankingError::ZeroK);
    }

    #[test]
    fn pl_concentrates_at_high_alpha() {
        let d = docs(&[("A", F), ("B", M)]);
        let p = pool(&d, &[1.0, 0.0]);
        let mut rng = trial_rng(11);
        let hits = (0..10_000)
            .filter(|_| plackett_luce_sample(&p, 2, 50.0, &mut rng).unwrap().doc_ids() == vec!["A", "B"])
            .count();
        assert_eq!(hits, 10_000);
    }

    #[test]
    fn pl_rejects_negative_alpha() {
        let d = docs(&[("A", F)]);
        let p = pool(&d, &[1.0]);
        let mut rng = trial_rng(0);
        assert!(matches!(
            plackett_luce_sample(&p, 1, -1.0, &mut rng),
            Err(RankingError::InvalidParams(_))
        ));
    }

    #[test]
    fn forced_exposure_hand_trace() {
        let d = docs(&[("f1", F), ("m1", M), ("m2", M), ("m3", M), ("f2", F)]);
        let p = pool(&d, &[0.9, 0.8, 0.7, 0.6, 0.4]);
        let out = rank_forced_exposure(&p, 4, ForcedExposureParams::with_min(2)).unwrap();
        assert_eq!(out.list.doc_ids(), vec!["f1", "m1", "m2", "f2"]);
        assert!(out.is_feasible());
    }

    #[test]
    fn forced_exposure_exhausted_group() {
        let d = docs(&[("m1", M), ("m2", M)]);
        let p = pool(&d, &[0.8, 0.7]);
        let out = rank_forced_exposure(&p, 2, ForcedExposureParams::with_min(1)).unwrap();
        assert_eq!(out.list.doc_ids(), vec!["m1", "m2"]);
        assert!(!out.protected_quota_met);
        assert!(out.non_protected_quota_met);
    }

    #[test]
    fn forced_exposure_simple_and_tie() {
        let d = docs(&[("f", F), ("m", M)]);
        let p = pool(&d, &[0.9, 0.1]);
        let out = rank_forced_exposure(&p, 2, ForcedExposureParams::with_min(1)).unwrap();
        assert_eq!(out.list.doc_ids(), vec!["f", "m"]);

        let d = docs(&[("a", M), ("z", F)]);
        let p = pool(&d, &[0.5, 0.5]);
        let out = rank_forced_exposure(&p, 1, ForcedExposureParams::with_min(0)).unwrap();
        assert_eq!(out.list.doc_ids(), vec!["z"]);
    }

    #[test]
    fn forced_exposure_defaults_and_validation() {
        assert_eq!(ForcedExposureParams::default().resolve(5).unwrap(), 2);
        assert_eq!(ForcedExposureParams::default().resolve(4).unwrap(), 2);
        assert!(ForcedExposureParams::with_min(3).resolve(5).is_err());
    }

    #[test]
    fn correction_cap_binds() {
        let params = RepresentativeParams::default();
        assert_eq!(params.corrections(0.75), (1.0, 0.0));
        let p = RepresentativeParams { gamma: 10.0, ..params };
        assert_eq!(p.corrections(0.15), (1.0, 0.0));
        assert_eq!(params.corrections(-0.25), (0.0, 0.5));
        assert_eq!(params.corrections(0.0), (0.0, 0.0));
    }

    #[test]
    fn guard_arithmetic_for_k2() {
        // non-protected at position 1: best case share is w2 / (w1 + w2) ~ 0.3869
        let best = exposure_weight(2) / (1.0 + exposure_weight(2));
        assert!((best - 0.3869).abs() < 1e-4);
        assert!(target_unreachable(0.0, 2, 2, 0.5));
        assert!(!target_unreachable(1.0, 2, 2, 0.5));
        assert!(!target_unreachable(0.0, 1, 5, 0.5));
    }

    #[test]
    fn guard_forces_protected_second_slot() {
        // Heavily favoured non-protected docs; whenever one lands first the
        // second slot must be protected.
        let d = docs(&[("m1", M), ("m2", M), ("m3", M), ("f1", F), ("f2", F)]);
        let p = pool(&d, &[1.0, 0.99, 0.98, 0.0, 0.01]);
        let mut rng = trial_rng(5);
        let mut checked = 0;
        for _ in 0..2_000 {
            let list = rank_representative_stochastic(&p, 2, RepresentativeParams::default(), &mut rng).unwrap();
            let groups = list.groups();
            if groups[0] == M {
                assert_eq!(groups[1], F);
                checked += 1;
            }
        }
        assert!(checked > 1_000);
    }

    #[test]
    fn representative_without_protected_candidates() {
        let d = docs(&[("m1", M), ("m2", M), ("m3", M)]);
        let p = pool(&d, &[0.3, 0.2, 0.1]);
        let mut rng = trial_rng(9);
        let list = rank_representative_stochastic(&p, 3, RepresentativeParams::default(), &mut rng).unwrap();
        assert_eq!(list.len(), 3);
        assert_eq!(list.protected_count(), 0);
    }

    #[test]
    fn representative_rejects_bad_tau() {
        let d = docs(&[("m1", M)]);
        let p = pool(&d, &[0.3]);
        let mut rng = trial_rng(9);
        let params = RepresentativeParams {
            tau: 1.5,
            ..Default::default()
        };
        assert!(rank_representative_stochastic(&p, 1, params, &mut rng).is_err());
    }

    #[test]
    fn protected_counts() {
        let d = docs(&[("a", F), ("b", M), ("c", F)]);
        let p = pool(&d, &[0.9, 0.8, 0.7]);
        assert_eq!(rank_standard(&p, 3).unwrap().protected_count(), 2);
        assert_eq!(protected_count(&RankedList::from_candidates(5, Vec::new())), 0);
        let d = docs(&[("a", M), ("b", M), ("c", M), ("d", M), ("e", M)]);
        let p = pool(&d, &[0.9, 0.8, 0.7, 0.6, 0.5]);
        assert_eq!(rank_standard(&p, 5).unwrap().protected_count(), 0);
    }

    #[test]
    fn ranker_names_round_trip() {
        let settings = RankerSettings::default();
        for name in RANKER_NAMES {
            assert_eq!(Ranker::from_name(name, &settings).unwrap().name(), name);
        }
        assert!(matches!(
            Ranker::from_name("bogus", &settings),
            Err(RankingError::UnknownRanker(_))
        ));
    }
}
