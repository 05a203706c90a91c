//! Seeded Monte Carlo experiments.
//!
//! An [`Experiment`] knows how to run replication `i` from its own stream
//! ([`derive_rep_stream`]) and returns one value per report point. An
//! [`Executor`] decides where replications run; the report is assembled in
//! replication order, so it is a pure function of the config whatever the
//! executor does.

mod rng;
mod sampler;

use alloc::vec;
use alloc::vec::Vec;

pub use rng::{derive_rep_stream, RepStream};
pub use sampler::{sample_grouped, sample_iid, GroupedSampler};

use crate::covariance::{Correlation, CovarianceSpec};
use crate::error::{Error, Result};
use crate::intervals::{m_case_with, n_case_with, summarize, CriticalValue, GroupingScheme};
use crate::special::Probability;
use crate::theory;

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    /// Total sample size per replication.
    pub n: usize,
    /// Group counts to evaluate (length experiments).
    pub ms: Vec<usize>,
    pub theta: f64,
    pub cov: CovarianceSpec,
    pub alpha: Probability,
    pub reps: u64,
    pub seed: u64,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.reps == 0 {
            return Err(Error::Config("reps must be at least 1"));
        }
        if self.n < 2 {
            return Err(Error::InsufficientData { needed: 2, got: self.n });
        }
        if !self.theta.is_finite() {
            return Err(Error::Config("theta must be finite"));
        }
        for &m in &self.ms {
            GroupingScheme::for_len(self.n, m)?;
        }
        Ok(())
    }

    /// FNV-1a over a fixed little-endian encoding of every field, salted
    /// with the experiment kind.
    pub fn config_hash(&self, kind: &str) -> u64 {
        let mut h = Fnv::new();
        h.bytes(kind.as_bytes());
        h.u64(self.n as u64);
        h.u64(self.ms.len() as u64);
        for &m in &self.ms {
            h.u64(m as u64);
        }
        h.u64(self.theta.to_bits());
        h.u64(self.cov.sigma_sq().to_bits());
        h.u64(self.cov.k() as u64);
        match self.cov.correlation() {
            Correlation::Equi(rho) => {
                h.u64(0);
                h.u64(rho.to_bits());
            }
            Correlation::Full(m) => {
                h.u64(1);
                for i in 0..m.k() {
                    for j in 0..m.k() {
                        h.u64(m.get(i, j).to_bits());
                    }
                }
            }
        }
        h.u64(self.alpha.get().to_bits());
        h.u64(self.reps);
        h.u64(self.seed);
        h.0
    }
}

/// FNV-1a over a sequence of config hashes, for a run made of several
/// experiments.
pub fn combine_hashes(hashes: &[u64]) -> u64 {
    let mut h = Fnv::new();
    for &x in hashes {
        h.u64(x);
    }
    h.0
}

struct Fnv(u64);

impl Fnv {
    fn new() -> Self {
        Self(0xcbf2_9ce4_8422_2325)
    }

    fn bytes(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.0 ^= b as u64;
            self.0 = self.0.wrapping_mul(0x0100_0000_01b3);
        }
    }

    fn u64(&mut self, v: u64) {
        self.bytes(&v.to_le_bytes());
    }
}

/// What one report row measures.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    pub statistic: &'static str,
    pub params: Vec<(&'static str, f64)>,
    /// Closed-form value the estimate should approach, when one exists.
    pub theory: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub statistic: &'static str,
    pub params: Vec<(&'static str, f64)>,
    pub estimate: f64,
    /// Sample standard deviation over replications divided by `√reps`;
    /// absent for a single replication.
    pub std_error: Option<f64>,
    pub theory: Option<f64>,
    pub reps: u64,
}

impl ReportRow {
    pub fn param(&self, name: &str) -> Option<f64> {
        self.params.iter().find(|(k, _)| *k == name).map(|&(_, v)| v)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimReport {
    pub kind: &'static str,
    pub seed: u64,
    pub config_hash: u64,
    pub rows: Vec<ReportRow>,
}

impl SimReport {
    pub fn rows_for<'a>(&'a self, statistic: &'a str) -> impl Iterator<Item = &'a ReportRow> + 'a {
        self.rows.iter().filter(move |r| r.statistic == statistic)
    }
}

pub trait Experiment: Sync {
    fn kind(&self) -> &'static str;
    fn config(&self) -> &SimConfig;
    fn points(&self) -> &[Point];
    /// Statistics of replication `rep`, one per point, in point order.
    fn replicate(&self, rep: u64) -> Vec<f64>;
}

/// Runs replications `0..reps`, returning results indexed by replication.
pub trait Executor {
    fn run(&self, reps: u64, job: &(dyn Fn(u64) -> Vec<f64> + Sync)) -> Vec<Vec<f64>>;
}

/// Runs replications one after another on the calling thread.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl Executor for Sequential {
    fn run(&self, reps: u64, job: &(dyn Fn(u64) -> Vec<f64> + Sync)) -> Vec<Vec<f64>> {
        (0..reps).map(job).collect()
    }
}

pub fn run_experiment<E: Experiment, X: Executor + ?Sized>(experiment: &E, executor: &X) -> SimReport {
    let config = experiment.config();
    let per_rep = executor.run(config.reps, &|rep| experiment.replicate(rep));
    assemble(experiment, &per_rep)
}

fn assemble<E: Experiment>(experiment: &E, per_rep: &[Vec<f64>]) -> SimReport {
    let config = experiment.config();
    let reps = per_rep.len() as u64;
    let rows = experiment
        .points()
        .iter()
        .enumerate()
        .map(|(i, point)| {
            let mean = per_rep.iter().map(|r| r[i]).sum::<f64>() / reps as f64;
            let std_error = (reps > 1).then(|| {
                let ss: f64 = per_rep.iter().map(|r| (r[i] - mean) * (r[i] - mean)).sum();
                libm::sqrt(ss / (reps - 1) as f64) / libm::sqrt(reps as f64)
            });
            ReportRow {
                statistic: point.statistic,
                params: point.params.clone(),
                estimate: mean,
                std_error,
                theory: point.theory,
                reps,
            }
        })
        .collect();
    SimReport { kind: experiment.kind(), seed: config.seed, config_hash: config.config_hash(experiment.kind()), rows }
}

/// Expected interval length under iid sampling, one sample per replication
/// shared by every group count `m`.
#[derive(Debug, Clone)]
pub struct LengthExperiment {
    config: SimConfig,
    crits: Vec<CriticalValue>,
    schemes: Vec<GroupingScheme>,
    points: Vec<Point>,
}

impl LengthExperiment {
    pub fn new(config: SimConfig) -> Result<Self> {
        config.validate()?;
        if !config.cov.is_independent() {
            return Err(Error::Config("length experiments sample iid data"));
        }
        if config.ms.is_empty() {
            return Err(Error::Config("no group counts requested"));
        }
        let sigma = config.cov.sigma();
        let mut crits = Vec::with_capacity(config.ms.len());
        let mut schemes = Vec::with_capacity(config.ms.len());
        let mut points = Vec::with_capacity(config.ms.len());
        for &m in &config.ms {
            schemes.push(GroupingScheme::for_len(config.n, m)?);
            crits.push(CriticalValue::for_count(config.alpha, m)?);
            let theory = theory::expected_length_iid(config.n as u64, m as u64, config.alpha, sigma)?;
            points.push(Point { statistic: "length", params: vec![("m", m as f64)], theory: Some(theory) });
        }
        Ok(Self { config, crits, schemes, points })
    }
}

impl Experiment for LengthExperiment {
    fn kind(&self) -> &'static str {
        "length"
    }

    fn config(&self) -> &SimConfig {
        &self.config
    }

    fn points(&self) -> &[Point] {
        &self.points
    }

    fn replicate(&self, rep: u64) -> Vec<f64> {
        let c = &self.config;
        let mut stream = derive_rep_stream(c.seed, rep);
        let sigma = c.cov.sigma();
        let data: Vec<f64> = (0..c.n).map(|_| c.theta + sigma * stream.normal()).collect();
        self.schemes
            .iter()
            .zip(&self.crits)
            .map(|(&scheme, crit)| {
                let stats = summarize(&data, Some(scheme)).expect("scheme validated against n");
                m_case_with(&stats, crit).expect("critical value matches m").length()
            })
            .collect()
    }
}

/// Correlated groups: n-case and m-case coverage of `θ`, m-case length and
/// `S_n²`, with `m = n / k` groups drawn from `cov`. `config.ms` is ignored.
#[derive(Debug, Clone)]
pub struct CoverageExperiment {
    config: SimConfig,
    scheme: GroupingScheme,
    sampler: GroupedSampler,
    crit_n: CriticalValue,
    crit_m: CriticalValue,
    points: Vec<Point>,
}

impl CoverageExperiment {
    pub const N_CASE_COVERAGE: &'static str = "n_case_coverage";
    pub const M_CASE_COVERAGE: &'static str = "m_case_coverage";
    pub const M_CASE_LENGTH: &'static str = "m_case_length";
    pub const S_N_SQ: &'static str = "s_n_sq";

    pub fn new(config: SimConfig) -> Result<Self> {
        config.validate()?;
        let k = config.cov.k();
        if config.n % k != 0 {
            return Err(Error::Partition { n: config.n, m: config.n / k.max(1) });
        }
        let scheme = GroupingScheme::new(config.n / k, k)?;
        let m = scheme.m() as u64;
        let alpha = config.alpha;
        let mut params = vec![("k", k as f64), ("m", m as f64)];
        if let Some(rho) = config.cov.rho() {
            params.push(("rho", rho));
        }
        let points = vec![
            Point {
                statistic: Self::N_CASE_COVERAGE,
                params: params.clone(),
                theory: Some(theory::coverage_limit(&config.cov, alpha)?),
            },
            Point { statistic: Self::M_CASE_COVERAGE, params: params.clone(), theory: Some(alpha.complement().get()) },
            Point {
                statistic: Self::M_CASE_LENGTH,
                params: params.clone(),
                theory: Some(theory::expected_length_grouped(m, &config.cov, alpha)?),
            },
            Point {
                statistic: Self::S_N_SQ,
                params,
                theory: Some(theory::expected_sn_sq(m, k as u64, &config.cov)?),
            },
        ];
        Ok(Self {
            sampler: GroupedSampler::new(&config.cov, config.theta)?,
            crit_n: CriticalValue::for_count(alpha, config.n)?,
            crit_m: CriticalValue::for_count(alpha, scheme.m())?,
            scheme,
            points,
            config,
        })
    }
}

impl Experiment for CoverageExperiment {
    fn kind(&self) -> &'static str {
        "coverage"
    }

    fn config(&self) -> &SimConfig {
        &self.config
    }

    fn points(&self) -> &[Point] {
        &self.points
    }

    fn replicate(&self, rep: u64) -> Vec<f64> {
        let mut stream = derive_rep_stream(self.config.seed, rep);
        let data = self.sampler.sample(self.scheme.m(), &mut stream);
        let stats = summarize(&data, Some(self.scheme)).expect("scheme validated against n");
        let n_ci = n_case_with(&stats, &self.crit_n).expect("critical value matches n");
        let m_ci = m_case_with(&stats, &self.crit_m).expect("critical value matches m");
        let theta = self.config.theta;
        let indicator = |b: bool| if b { 1.0 } else { 0.0 };
        vec![indicator(n_ci.contains(theta)), indicator(m_ci.contains(theta)), m_ci.length(), stats.s_n_sq]
    }
}

/// Mean m-case interval length for each requested `m` (iid data).
pub fn run_length_experiment(config: SimConfig) -> Result<SimReport> {
    Ok(run_experiment(&LengthExperiment::new(config)?, &Sequential))
}

/// n-case and m-case coverage under the configured within-group covariance.
pub fn run_coverage_experiment(config: SimConfig) -> Result<SimReport> {
    Ok(run_experiment(&CoverageExperiment::new(config)?, &Sequential))
}

/// Every divisor `m >= 2` of `n`, descending.
pub fn divisors(n: usize) -> Vec<usize> {
    let mut out: Vec<usize> = (2..=n).filter(|m| n % m == 0).collect();
    out.reverse();
    out
}
