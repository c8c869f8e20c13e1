//! Retrieval and generation fairness metrics.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::GroupLabel;
use crate::generation::Citation;
use crate::ranking::{exposure_weight, RankedList};

/// Exposure share at parity.
pub const PARITY: f64 = 0.5;

/// Errors from metric computation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum MetricsError {
    /// Exposure share of an empty list is undefined.
    #[error("ranked list is empty")]
    EmptyList,
}

/// Fraction of position-weighted exposure held by protected entries, for a
/// list given as groups in rank order.
pub fn exposure_share_of_groups(groups: &[GroupLabel]) -> Result<f64, MetricsError> {
    if groups.is_empty() {
        return Err(MetricsError::EmptyList);
    }
    let (protected, total) = groups.iter().enumerate().fold((0.0, 0.0), |(p, t), (i, g)| {
        let w = exposure_weight(i + 1);
        (if g.is_protected() { p + w } else { p }, t + w)
    });
    Ok(protected / total)
}

/// Protected exposure share of a ranked list.
pub fn exposure_share(list: &RankedList<'_>) -> Result<f64, MetricsError> {
    exposure_share_of_groups(&list.groups())
}

/// Distance of an exposure share from parity: `|share - 0.5|`.
pub fn exposure_disparity(share: f64) -> f64 {
    (share - PARITY).abs()
}

/// Protected fraction of the grounded citations; `None` when nothing grounds.
pub fn generation_parity(citations: &[Citation]) -> Option<f64> {
    let (protected, grounded) = citations
        .iter()
        .filter_map(|c| c.group)
        .fold((0usize, 0usize), |(p, n), g| (p + usize::from(g.is_protected()), n + 1));
    (grounded > 0).then(|| protected as f64 / grounded as f64)
}

/// Fraction of parsed citations whose title, after trimming, exactly matches
/// a context document title. Zero when nothing was parsed.
pub fn utility(citations: &[Citation], context: &RankedList<'_>) -> f64 {
    if citations.is_empty() {
        return 0.0;
    }
    let hits = citations
        .iter()
        .filter(|c| {
            let title = c.doc_title.trim();
            context
                .entries()
                .iter()
                .any(|e| e.candidate.document.title.trim() == title)
        })
        .count();
    hits as f64 / citations.len() as f64
}

/// Signed difference `gen_parity - exposure_share`; positive means the
/// generator cited the protected group more than retrieval exposed it.
pub fn fairness_gap(gen_parity: f64, exposure_share: f64) -> f64 {
    gen_parity - exposure_share
}

/// `|gen_parity - 0.5| - |exposure_share - 0.5|`; positive means generation
/// moved further from parity than retrieval.
pub fn fairness_gap_magnitude(gen_parity: f64, exposure_share: f64) -> f64 {
    exposure_disparity(gen_parity) - exposure_disparity(exposure_share)
}

/// Retrieval-stage metrics for one ranked list.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RetrievalMetrics {
    /// Protected exposure share.
    pub exposure_share_protected: f64,
    /// `|share - 0.5|`.
    pub exposure_disparity: f64,
}

impl RetrievalMetrics {
    /// Computes both retrieval metrics.
    pub fn from_list(list: &RankedList<'_>) -> Result<Self, MetricsError> {
        let share = exposure_share(list)?;
        Ok(Self {
            exposure_share_protected: share,
            exposure_disparity: exposure_disparity(share),
        })
    }
}

/// Generation-stage metrics for one answer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenerationMetrics {
    /// Protected fraction of grounded citations.
    pub demographic_parity: Option<f64>,
    /// Grounded fraction of parsed citations.
    pub utility: f64,
    /// Signed parity minus exposure share.
    pub fairness_gap: Option<f64>,
    /// Change in distance from parity between retrieval and generation.
    pub fairness_gap_magnitude: Option<f64>,
}

impl GenerationMetrics {
    /// Computes generation metrics against the context's exposure share.
    pub fn compute(citations: &[Citation], context: &RankedList<'_>, exposure_share: f64) -> Self {
        let parity = generation_parity(citations);
        Self {
            demographic_parity: parity,
            utility: utility(citations, context),
            fairness_gap: parity.map(|p| fairness_gap(p, exposure_share)),
            fairness_gap_magnitude: parity.map(|p| fairness_gap_magnitude(p, exposure_share)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::String;
    use alloc::vec;
    use alloc::vec::Vec;
    use GroupLabel::{NonProtected as M, Protected as F};

    fn cite(title: &str, group: Option<GroupLabel>) -> Citation {
        Citation {
            person_name: String::from(title),
            doc_title: String::from(title),
            grounded: group.is_some(),
            group,
        }
    }

    #[test]
    fn share_examples() {
        assert_eq!(exposure_share_of_groups(&[F; 5]).unwrap(), 1.0);
        let fm = exposure_share_of_groups(&[F, M]).unwrap();
        assert!((fm - 1.0 / (1.0 + 1.0 / libm::log2(3.0))).abs() < 1e-12);
        assert!((fm - 0.6131).abs() < 1e-4);
        let mf = exposure_share_of_groups(&[M, F]).unwrap();
        assert!((mf - 0.3869).abs() < 1e-4);
        assert_eq!(exposure_share_of_groups(&[]).unwrap_err(), MetricsError::EmptyList);
    }

    #[test]
    fn disparity_examples() {
        assert_eq!(exposure_disparity(0.125), 0.375);
        assert_eq!(exposure_disparity(0.5), 0.0);
        assert_eq!(exposure_disparity(1.0), 0.5);
    }

    #[test]
    fn parity_examples() {
        let mut c: Vec<Citation> = vec![cite("a", Some(F)), cite("b", Some(F)), cite("c", Some(F))];
        c.push(cite("d", Some(M)));
        c.push(cite("e", Some(M)));
        assert_eq!(generation_parity(&c), Some(0.6));
        assert_eq!(generation_parity(&[]), None);
        assert_eq!(generation_parity(&[cite("x", None)]), None);
        assert_eq!(generation_parity(&vec![cite("a", Some(F)); 5]), Some(1.0));
    }

    #[test]
    fn gap_examples() {
        assert!((fairness_gap(0.6, 0.5) - 0.1).abs() < 1e-12);
        assert_eq!(fairness_gap(0.5, 0.5), 0.0);
        assert!((fairness_gap(0.2, 0.4) + 0.2).abs() < 1e-12);
        assert!((fairness_gap_magnitude(0.9, 0.6) - 0.3).abs() < 1e-12);
        assert!((fairness_gap_magnitude(0.5, 0.1) + 0.4).abs() < 1e-12);
        assert_eq!(fairness_gap_magnitude(0.5, 0.5), 0.0);
    }
}
