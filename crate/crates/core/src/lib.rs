//! Two t-based confidence intervals for a normal mean.
//!
//! The *n-case* interval uses all `n` observations and `n - 1` degrees of
//! freedom. The *m-case* interval splits the sample into `m` contiguous
//! groups of `k` and uses the `m` group means with `m - 1` degrees of
//! freedom. Under iid sampling the n-case interval is shorter on average;
//! when observations are correlated within groups it undercovers while the
//! m-case interval stays valid.
//!
//! The crate is `no_std` (with `alloc`). All floating-point math goes
//! through `libm` so simulation output is bit-identical across platforms.
//!
//! - [`special`]: gamma, incomplete beta, normal and Student-t kernels.
//! - [`intervals`]: summary statistics and both interval constructions.
//! - [`covariance`]: within-group covariance specs.
//! - [`theory`]: expected lengths, limiting coverage and quantile-ratio checks.
//! - [`mcsim`]: seeded, executor-agnostic Monte Carlo experiments.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod covariance;
mod error;
pub mod intervals;
pub mod mcsim;
pub mod special;
pub mod theory;

pub use covariance::{Correlation, CorrelationMatrix, CovarianceSpec};
pub use error::{Error, Result};
pub use intervals::{
    m_case_from_means, m_case_interval, n_case_interval, summarize, ConfidenceInterval, GroupingScheme,
    SummaryStats,
};
pub use mcsim::{SimConfig, SimReport};
pub use special::{DegreesOfFreedom, Probability};
