//! Descriptive statistics and the equal-n two-sample t-test.
//!
//! Critical values come from numerically inverting the Student-t CDF, which is
//! expressed through the regularized incomplete beta function:
//!
//! ```text
//! P(|T| > t) = I_x(df/2, 1/2),   x = df / (df + t^2)
//! ```

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default |z| threshold above which a sample counts as an outlier.
pub const DEFAULT_OUTLIER_Z: f64 = 3.0;

/// Significance levels accepted by [`critical_t`].
pub const SUPPORTED_ALPHAS: [f64; 2] = [0.01, 0.05];

/// Errors from the statistics routines.
#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum StatsError {
    /// Fewer than two samples.
    #[error("need at least 2 samples, got {0}")]
    TooFewSamples(usize),
    /// NaN or infinite sample.
    #[error("sample is not finite")]
    NonFiniteSample,
    /// The two groups differ in size.
    #[error("groups must have equal size ({0} vs {1})")]
    UnequalN(usize, usize),
    /// Both standard deviations are zero.
    #[error("both groups have zero variance")]
    DegenerateVariance,
    /// Significance level outside the supported set.
    #[error("unsupported significance level {0} (supported: 0.01, 0.05)")]
    UnsupportedAlpha(f64),
    /// Zero degrees of freedom.
    #[error("degrees of freedom must be at least 1")]
    ZeroDegreesOfFreedom,
}

/// Mean, sample standard deviation and outlier count of one group.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    /// Number of samples.
    pub n: usize,
    /// Arithmetic mean.
    pub mean: f64,
    /// Bessel-corrected standard deviation.
    pub std: f64,
    /// Samples with `|z|` above the outlier threshold.
    pub outlier_count: usize,
}

impl SummaryStats {
    /// Summary from known moments (no outlier information).
    pub fn from_moments(n: usize, mean: f64, std: f64) -> Self {
        Self {
            n,
            mean,
            std,
            outlier_count: 0,
        }
    }
}

/// [`summarize_with_threshold`] at `|z| > 3`.
pub fn summarize(samples: &[f64]) -> Result<SummaryStats, StatsError> {
    summarize_with_threshold(samples, DEFAULT_OUTLIER_Z)
}

/// Mean, Bessel-corrected std and the number of samples with `|z| > z_threshold`.
///
/// With zero spread no sample is an outlier.
pub fn summarize_with_threshold(samples: &[f64], z_threshold: f64) -> Result<SummaryStats, StatsError> {
    let n = samples.len();
    if n < 2 {
        return Err(StatsError::TooFewSamples(n));
    }
    if samples.iter().any(|x| !x.is_finite()) {
        return Err(StatsError::NonFiniteSample);
    }
    let mean = samples.iter().sum::<f64>() / n as f64;
    let ss: f64 = samples.iter().map(|x| (x - mean) * (x - mean)).sum();
    let std = libm::sqrt(ss / (n - 1) as f64);
    let outlier_count = if std > 0.0 {
        samples
            .iter()
            .filter(|&&x| ((x - mean) / std).abs() > z_threshold)
            .count()
    } else {
        0
    };
    Ok(SummaryStats {
        n,
        mean,
        std,
        outlier_count,
    })
}

/// Outcome of one two-sample t-test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TTestResult {
    /// Signed t statistic (first minus second group).
    pub t_value: f64,
    /// Degrees of freedom, `2n - 2`.
    pub df: usize,
    /// Two-tailed critical value at the requested level.
    pub critical_t: f64,
    /// `|t_value| > critical_t`.
    pub significant: bool,
}

/// Independent two-sample t-test for equal group sizes:
/// `t = (mean_a - mean_b) / sqrt((s_a^2 + s_b^2) / n)` with `2n - 2` degrees
/// of freedom. For equal `n` this is both the pooled-variance and the Welch
/// statistic.
pub fn t_test(a: &SummaryStats, b: &SummaryStats, alpha_level: f64) -> Result<TTestResult, StatsError> {
    if a.n != b.n {
        return Err(StatsError::UnequalN(a.n, b.n));
    }
    if a.n < 2 {
        return Err(StatsError::TooFewSamples(a.n));
    }
    if a.std == 0.0 && b.std == 0.0 {
        return Err(StatsError::DegenerateVariance);
    }
    let df = 2 * a.n - 2;
    let critical = critical_t(df, alpha_level)?;
    let se = libm::sqrt((a.std * a.std + b.std * b.std) / a.n as f64);
    let t_value = (a.mean - b.mean) / se;
    Ok(TTestResult {
        t_value,
        df,
        critical_t: critical,
        significant: t_value.abs() > critical,
    })
}

/// Two-tailed Student-t critical value: the `t` with `P(|T| > t) = alpha_level`.
pub fn critical_t(df: usize, alpha_level: f64) -> Result<f64, StatsError> {
    if df == 0 {
        return Err(StatsError::ZeroDegreesOfFreedom);
    }
    if !SUPPORTED_ALPHAS.iter().any(|a| (a - alpha_level).abs() < 1e-12) {
        return Err(StatsError::UnsupportedAlpha(alpha_level));
    }
    Ok(two_tailed_quantile(df as f64, alpha_level))
}

/// Inverts `I_x(df/2, 1/2) = alpha` for `x` by bisection, then maps back to `t`.
fn two_tailed_quantile(df: f64, alpha: f64) -> f64 {
    let (a, b) = (0.5 * df, 0.5);
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    // I_x is increasing in x; 200 halvings exhaust f64 precision.
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if regularized_incomplete_beta(mid, a, b) < alpha {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let x = 0.5 * (lo + hi);
    libm::sqrt(df * (1.0 - x) / x)
}

/// Two-tailed p-value `P(|T| > |t|)` for `df` degrees of freedom.
pub fn two_tailed_p_value(t: f64, df: f64) -> f64 {
    if !t.is_finite() {
        return 0.0;
    }
    regularized_incomplete_beta(df / (df + t * t), 0.5 * df, 0.5)
}

/// Regularized incomplete beta `I_x(a, b)` via its continued fraction.
pub fn regularized_incomplete_beta(x: f64, a: f64, b: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = libm::lgamma(a + b) - libm::lgamma(a) - libm::lgamma(b) + a * libm::log(x) + b * libm::log1p(-x);
    let front = libm::exp(ln_front);
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_continued_fraction(x, a, b) / a
    } else {
        1.0 - front * beta_continued_fraction(1.0 - x, b, a) / b
    }
}

/// Modified Lentz evaluation of the incomplete beta continued fraction.
fn beta_continued_fraction(x: f64, a: f64, b: f64) -> f64 {
    const TINY: f64 = 1e-300;
    const EPS: f64 = 1e-15;
    const MAX_ITER: usize = 100_000;

    let (qab, qap, qam) = (a + b, a + 1.0, a - 1.0);
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < EPS {
            break;
        }
    }
    h
}
