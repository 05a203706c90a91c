//! The n-case interval (all observations, `n - 1` df) and the m-case
//! interval (group means, `m - 1` df).
//!
//! Groups are contiguous blocks in input order: group `i` holds elements
//! `i*k .. (i+1)*k`.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::special::{t_quantile, DegreesOfFreedom, Probability};

/// A partition of `n = m * k` observations into `m` groups of size `k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GroupingScheme {
    m: usize,
    k: usize,
}

impl GroupingScheme {
    pub fn new(m: usize, k: usize) -> Result<Self> {
        if m < 2 {
            return Err(Error::InsufficientData { needed: 2, got: m });
        }
        if k < 1 {
            return Err(Error::Partition { n: 0, m });
        }
        Ok(Self { m, k })
    }

    /// `m` groups over `n` observations; `m` must divide `n`.
    pub fn for_len(n: usize, m: usize) -> Result<Self> {
        if m == 0 || n % m != 0 {
            return Err(Error::Partition { n, m });
        }
        Self::new(m, n / m)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.m * self.k
    }
}

/// The between-group part of [`SummaryStats`].
#[derive(Debug, Clone, PartialEq)]
pub struct GroupedStats {
    pub m: usize,
    pub k: usize,
    pub group_means: Vec<f64>,
    /// Sample variance of the group means, `1/(m-1)` divisor.
    pub s_m_sq: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryStats {
    pub n: usize,
    pub mean: f64,
    /// Sample variance of all observations, `1/(n-1)` divisor.
    pub s_n_sq: f64,
    pub grouped: Option<GroupedStats>,
}

fn mean_and_var(data: &[f64]) -> (f64, f64) {
    let n = data.len() as f64;
    let mean = data.iter().sum::<f64>() / n;
    let ss: f64 = data.iter().map(|x| (x - mean) * (x - mean)).sum();
    (mean, ss / (n - 1.0))
}

/// Mean, `S_n²` and, when a scheme is given, the group means and `S_m²`.
pub fn summarize(data: &[f64], scheme: Option<GroupingScheme>) -> Result<SummaryStats> {
    let n = data.len();
    if n < 2 {
        return Err(Error::InsufficientData { needed: 2, got: n });
    }
    let (mean, s_n_sq) = mean_and_var(data);
    let grouped = match scheme {
        None => None,
        Some(scheme) => {
            if scheme.n() != n {
                return Err(Error::Partition { n, m: scheme.m });
            }
            let group_means: Vec<f64> =
                data.chunks_exact(scheme.k).map(|g| g.iter().sum::<f64>() / scheme.k as f64).collect();
            let s_m_sq = group_means.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (scheme.m - 1) as f64;
            Some(GroupedStats { m: scheme.m, k: scheme.k, group_means, s_m_sq })
        }
    };
    Ok(SummaryStats { n, mean, s_n_sq, grouped })
}

impl SummaryStats {
    /// Statistics synthesized from group means alone (raw data never seen).
    ///
    /// The means are treated as the observations themselves, so `n = m`,
    /// `k = 1` and the overall mean is the mean of the means.
    pub fn from_group_means(group_means: &[f64]) -> Result<Self> {
        let m = group_means.len();
        if m < 2 {
            return Err(Error::InsufficientData { needed: 2, got: m });
        }
        let (mean, var) = mean_and_var(group_means);
        Ok(Self {
            n: m,
            mean,
            s_n_sq: var,
            grouped: Some(GroupedStats { m, k: 1, group_means: group_means.to_vec(), s_m_sq: var }),
        })
    }
}

/// A symmetric two-sided interval `center ± half_width`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfidenceInterval {
    pub center: f64,
    pub half_width: f64,
    /// Confidence level `1 - α`.
    pub level: Probability,
    pub df: DegreesOfFreedom,
}

impl ConfidenceInterval {
    fn t_based(center: f64, var: f64, count: usize, alpha: Probability) -> Result<Self> {
        CriticalValue::for_count(alpha, count)?.interval(center, var, count)
    }

    pub fn lower(&self) -> f64 {
        self.center - self.half_width
    }

    pub fn upper(&self) -> f64 {
        self.center + self.half_width
    }

    pub fn length(&self) -> f64 {
        2.0 * self.half_width
    }

    pub fn contains(&self, value: f64) -> bool {
        self.lower() <= value && value <= self.upper()
    }
}

/// A precomputed `t_{df, 1-α/2}`, for callers building many intervals with
/// the same degrees of freedom.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalValue {
    alpha: Probability,
    df: DegreesOfFreedom,
    t: f64,
}

impl CriticalValue {
    pub fn new(alpha: Probability, df: DegreesOfFreedom) -> Self {
        Self { alpha, df, t: t_quantile(alpha.upper_two_sided(), df) }
    }

    /// Critical value for an interval built from `count` values.
    pub fn for_count(alpha: Probability, count: usize) -> Result<Self> {
        if count < 2 {
            return Err(Error::InsufficientData { needed: 2, got: count });
        }
        Ok(Self::new(alpha, DegreesOfFreedom::new(count as u64 - 1)?))
    }

    pub fn value(&self) -> f64 {
        self.t
    }

    pub fn df(&self) -> DegreesOfFreedom {
        self.df
    }

    fn interval(&self, center: f64, var: f64, count: usize) -> Result<ConfidenceInterval> {
        if count as u64 != self.df.get() + 1 {
            return Err(Error::Domain { what: "critical value degrees of freedom", value: self.df.get() as f64 });
        }
        let half_width = self.t * libm::sqrt(var) / libm::sqrt(count as f64);
        Ok(ConfidenceInterval { center, half_width, level: self.alpha.complement(), df: self.df })
    }
}

/// [`n_case_interval`] with a precomputed critical value for `n - 1` df.
pub fn n_case_with(stats: &SummaryStats, crit: &CriticalValue) -> Result<ConfidenceInterval> {
    crit.interval(stats.mean, stats.s_n_sq, stats.n)
}

/// [`m_case_interval`] with a precomputed critical value for `m - 1` df.
pub fn m_case_with(stats: &SummaryStats, crit: &CriticalValue) -> Result<ConfidenceInterval> {
    let grouped = stats.grouped.as_ref().ok_or(Error::MissingGroups)?;
    crit.interval(stats.mean, grouped.s_m_sq, grouped.m)
}

/// `X̄ ± t_{n-1, 1-α/2} · S_n / √n`.
pub fn n_case_interval(stats: &SummaryStats, alpha: Probability) -> Result<ConfidenceInterval> {
    if stats.n < 2 {
        return Err(Error::InsufficientData { needed: 2, got: stats.n });
    }
    ConfidenceInterval::t_based(stats.mean, stats.s_n_sq, stats.n, alpha)
}

/// `X̄ ± t_{m-1, 1-α/2} · S_m / √m`.
pub fn m_case_interval(stats: &SummaryStats, alpha: Probability) -> Result<ConfidenceInterval> {
    let grouped = stats.grouped.as_ref().ok_or(Error::MissingGroups)?;
    if grouped.m < 2 {
        return Err(Error::InsufficientData { needed: 2, got: grouped.m });
    }
    ConfidenceInterval::t_based(stats.mean, grouped.s_m_sq, grouped.m, alpha)
}

/// m-case interval when only the group means were shipped.
pub fn m_case_from_means(group_means: &[f64], alpha: Probability) -> Result<ConfidenceInterval> {
    m_case_interval(&SummaryStats::from_group_means(group_means)?, alpha)
}
