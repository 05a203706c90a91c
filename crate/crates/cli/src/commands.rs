//! The work behind each subcommand. Everything returns a [`Table`]; `main`
//! only parses flags and writes.

use std::path::Path;

use groupci_core::intervals::{m_case_interval, n_case_interval};
use groupci_core::mcsim::{
    combine_hashes, divisors, run_experiment, CoverageExperiment, Executor, LengthExperiment, SimReport,
};
use groupci_core::special::DegreesOfFreedom;
use groupci_core::theory::{
    big_h_lambda, check_g_monotone, check_quantile_ratio, coverage_limit, expected_length_grouped,
    expected_length_iid, g_factor, lemma_ratio_bound, log_grid, LemmaPair,
};
use groupci_core::{
    m_case_from_means, summarize, ConfidenceInterval, CorrelationMatrix, CovarianceSpec, GroupingScheme, Probability,
    SimConfig,
};
use serde_json::json;

use crate::error::{CliError, Result};
use crate::grid::{Lemma1Grid, Lemma2Grid, MonotoneGrid};
use crate::output::{Cell, Table};

pub fn probability(name: &str, v: f64) -> Result<Probability> {
    Probability::new(v).map_err(|_| CliError::usage(format!("{name} must lie strictly between 0 and 1, got {v}")))
}

fn dof(d: u64) -> Result<DegreesOfFreedom> {
    DegreesOfFreedom::new(d).map_err(|_| CliError::usage(format!("degrees of freedom must be at least 1, got {d}")))
}

fn scheme(n: usize, m: usize) -> Result<GroupingScheme> {
    if m < 2 || n % m != 0 {
        return Err(CliError::Divisor { m, n });
    }
    Ok(GroupingScheme::for_len(n, m)?)
}

/// Requested group counts, or every divisor `m >= 2` of `n`.
pub fn group_counts(n: usize, ms: &[usize]) -> Result<Vec<usize>> {
    if ms.is_empty() {
        return Ok(divisors(n));
    }
    for &m in ms {
        scheme(n, m)?;
    }
    Ok(ms.to_vec())
}

const INTERVAL_COLUMNS: [&str; 10] =
    ["case", "m", "k", "center", "half_width", "lower", "upper", "length", "df", "level"];

fn interval_row(case: &str, m: usize, k: Option<usize>, ci: &ConfidenceInterval) -> Vec<Cell> {
    vec![
        case.into(),
        m.into(),
        k.map_or(Cell::Empty, Cell::from),
        ci.center.into(),
        ci.half_width.into(),
        ci.lower().into(),
        ci.upper().into(),
        ci.length().into(),
        ci.df.get().into(),
        ci.level.get().into(),
    ]
}

/// The n-case interval followed by the m-case interval for each `m`.
pub fn interval_table(values: &[f64], ms: &[usize], alpha: f64) -> Result<Table> {
    let a = probability("alpha", alpha)?;
    let n = values.len();
    let ms = group_counts(n, ms)?;
    let mut table = Table::new(&INTERVAL_COLUMNS).meta("command", json!("interval")).meta("n", json!(n));
    let stats = summarize(values, None)?;
    table.push(interval_row("n", n, Some(1), &n_case_interval(&stats, a)?));
    for m in ms {
        let s = scheme(n, m)?;
        let stats = summarize(values, Some(s))?;
        table.push(interval_row("m", m, Some(s.k()), &m_case_interval(&stats, a)?));
    }
    Ok(table)
}

/// The m-case interval when `means` are already group means.
pub fn group_means_table(means: &[f64], alpha: f64) -> Result<Table> {
    let a = probability("alpha", alpha)?;
    let ci = m_case_from_means(means, a)?;
    let mut table = Table::new(&INTERVAL_COLUMNS).meta("command", json!("interval")).meta("mode", json!("group-means"));
    table.push(interval_row("m", means.len(), None, &ci));
    Ok(table)
}

/// Expected m-case length under iid sampling for every divisor of `n`.
pub fn theory_table(n: usize, alpha: f64, sigma: f64) -> Result<Table> {
    let a = probability("alpha", alpha)?;
    if n < 2 {
        return Err(CliError::usage("--n must be at least 2"));
    }
    let mut table = Table::new(&["m", "k", "df", "g_factor", "expected_length"])
        .meta("command", json!("theory"))
        .meta("n", json!(n))
        .meta("alpha", json!(alpha))
        .meta("sigma", json!(sigma));
    for m in divisors(n) {
        let len = expected_length_iid(n as u64, m as u64, a, sigma)?;
        table.push(vec![m.into(), (n / m).into(), (m - 1).into(), Cell::Sci(g_factor(m as u64, a)?), len.into()]);
    }
    Ok(table)
}

/// Closed forms under within-group correlation, one row per `(k, ρ)`.
pub fn theory_cov_table(n: usize, alpha: f64, sigma: f64, ks: &[usize], rhos: &[f64]) -> Result<Table> {
    let a = probability("alpha", alpha)?;
    let mut table = Table::new(&[
        "k",
        "rho",
        "m",
        "delta",
        "n_case_length",
        "m_case_length_iid",
        "m_case_length",
        "ap_coverage",
    ])
    .meta("command", json!("theory"))
    .meta("n", json!(n))
    .meta("alpha", json!(alpha))
    .meta("sigma", json!(sigma));
    for &k in ks {
        if k == 0 || n % k != 0 || n / k < 2 {
            return Err(CliError::usage(format!("--k {k} must divide --n {n} into at least 2 groups")));
        }
        let m = n / k;
        for &rho in rhos {
            let cov = CovarianceSpec::equi(sigma * sigma, k, rho)?;
            table.push(vec![
                k.into(),
                rho.into(),
                m.into(),
                cov.delta().into(),
                expected_length_iid(n as u64, n as u64, a, sigma)?.into(),
                expected_length_iid(n as u64, m as u64, a, sigma)?.into(),
                expected_length_grouped(m as u64, &cov, a)?.into(),
                coverage_limit(&cov, a)?.into(),
            ]);
        }
    }
    Ok(table)
}

/// Shared simulation settings.
#[derive(Debug, Clone)]
pub struct SimSettings {
    pub n: usize,
    pub theta: f64,
    pub sigma: f64,
    pub alpha: f64,
    pub reps: u64,
    pub seed: u64,
}

impl SimSettings {
    fn config(&self, ms: Vec<usize>, cov: CovarianceSpec) -> Result<SimConfig> {
        if self.reps == 0 {
            return Err(CliError::usage("--reps must be at least 1"));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(CliError::usage(format!("--sigma must be positive, got {}", self.sigma)));
        }
        Ok(SimConfig {
            n: self.n,
            ms,
            theta: self.theta,
            cov,
            alpha: probability("alpha", self.alpha)?,
            reps: self.reps,
            seed: self.seed,
        })
    }

    fn meta(&self, table: Table, kind: &str, hash: u64) -> Table {
        table
            .meta("command", json!("simulate"))
            .meta("kind", json!(kind))
            .meta("seed", json!(self.seed))
            .meta("config_hash", json!(format!("{hash:016x}")))
            .meta("n", json!(self.n))
            .meta("theta", json!(self.theta))
            .meta("sigma", json!(self.sigma))
            .meta("alpha", json!(self.alpha))
            .meta("reps", json!(self.reps))
    }
}

/// Monte Carlo mean m-case length per `m` from one shared iid sample per rep.
pub fn simulate_length(s: &SimSettings, ms: &[usize], exec: &dyn Executor) -> Result<(Table, SimReport)> {
    let ms = group_counts(s.n, ms)?;
    let config = s.config(ms, CovarianceSpec::iid(s.sigma * s.sigma, 1)?)?;
    let report = run_experiment(&LengthExperiment::new(config)?, exec);
    let mut table = Table::new(&["m", "k", "estimate", "std_error", "theory", "reps"]);
    for row in &report.rows {
        let m = row.param("m").unwrap_or(f64::NAN) as usize;
        table.push(vec![
            m.into(),
            (s.n / m).into(),
            row.estimate.into(),
            row.std_error.into(),
            row.theory.into(),
            row.reps.into(),
        ]);
    }
    let table = s.meta(table, "length", report.config_hash);
    Ok((table, report))
}

/// Within-group correlation for a coverage run.
#[derive(Debug, Clone)]
pub enum CovarianceGrid {
    Equi { ks: Vec<usize>, rhos: Vec<f64> },
    Matrix(CorrelationMatrix),
}

/// Reads a `k × k` correlation matrix, one comma-separated row per line.
pub fn read_matrix(path: &Path) -> Result<CorrelationMatrix> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.display().to_string(), source })?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for line in text.lines().filter(|l| !l.trim().is_empty()) {
        let row = line
            .split(',')
            .map(|v| v.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
        rows.push(row);
    }
    let k = rows.len();
    if k == 0 || rows.iter().any(|r| r.len() != k) {
        return Err(CliError::usage(format!("{}: expected a square matrix", path.display())));
    }
    Ok(CorrelationMatrix::new(k, rows.concat())?)
}

pub const COVERAGE_COLUMNS: [&str; 15] = [
    "k",
    "rho",
    "m",
    "ap",
    "sp",
    "sp_se",
    "m_case_coverage",
    "m_case_coverage_se",
    "m_case_length",
    "m_case_length_se",
    "m_case_length_theory",
    "s_n_sq",
    "s_n_sq_se",
    "s_n_sq_theory",
    "reps",
];

/// n-case (SP) and m-case coverage for each covariance in `grid`.
pub fn simulate_coverage(
    s: &SimSettings,
    grid: &CovarianceGrid,
    exec: &dyn Executor,
) -> Result<(Table, Vec<SimReport>)> {
    let sigma_sq = s.sigma * s.sigma;
    let covs: Vec<CovarianceSpec> = match grid {
        CovarianceGrid::Equi { ks, rhos } => {
            if ks.is_empty() || rhos.is_empty() {
                return Err(CliError::usage("coverage runs need --k and --rho (or --corr)"));
            }
            let mut out = Vec::new();
            for &k in ks {
                for &rho in rhos {
                    out.push(CovarianceSpec::equi(sigma_sq, k, rho)?);
                }
            }
            out
        }
        CovarianceGrid::Matrix(m) => vec![CovarianceSpec::full(sigma_sq, m.clone())?],
    };
    let mut table = Table::new(&COVERAGE_COLUMNS);
    let mut reports = Vec::with_capacity(covs.len());
    for cov in covs {
        let k = cov.k();
        if k == 0 || s.n % k != 0 || s.n / k < 2 {
            return Err(CliError::usage(format!("--k {k} must divide --n {} into at least 2 groups", s.n)));
        }
        let rho = cov.rho();
        let report = run_experiment(&CoverageExperiment::new(s.config(Vec::new(), cov)?)?, exec);
        let row = |stat: &'static str| report.rows_for(stat).next().expect("coverage reports every statistic");
        let sp = row(CoverageExperiment::N_CASE_COVERAGE);
        let mc = row(CoverageExperiment::M_CASE_COVERAGE);
        let ml = row(CoverageExperiment::M_CASE_LENGTH);
        let sn = row(CoverageExperiment::S_N_SQ);
        table.push(vec![
            k.into(),
            rho.into(),
            (s.n / k).into(),
            sp.theory.into(),
            sp.estimate.into(),
            sp.std_error.into(),
            mc.estimate.into(),
            mc.std_error.into(),
            ml.estimate.into(),
            ml.std_error.into(),
            ml.theory.into(),
            sn.estimate.into(),
            sn.std_error.into(),
            sn.theory.into(),
            sp.reps.into(),
        ]);
        reports.push(report);
    }
    let hashes: Vec<u64> = reports.iter().map(|r| r.config_hash).collect();
    let table = s.meta(table, "coverage", combine_hashes(&hashes));
    Ok((table, reports))
}

/// Outcome of a `verify` subcommand.
#[derive(Debug, Clone)]
pub struct Verdict {
    pub table: Table,
    pub passed: bool,
    pub checks: usize,
}

fn verdict(table: Table, name: &str, statuses: &[bool]) -> Verdict {
    let passed = statuses.iter().all(|&ok| ok);
    let table = table.meta("command", json!(format!("verify {name}"))).meta("passed", json!(passed));
    Verdict { table, passed, checks: statuses.len() }
}

/// Strict decrease of the g-factor on `m = 2..m_max` for each α.
pub fn verify_monotone(grid: &MonotoneGrid) -> Result<Verdict> {
    if grid.m_max < 3 {
        return Err(CliError::usage("m_max must be at least 3"));
    }
    let mut table = Table::new(&["alpha", "m_max", "steps", "violations", "first_m", "g_m", "g_next", "status"]);
    let mut statuses = Vec::new();
    for &alpha in &grid.alphas {
        let bad = check_g_monotone(grid.m_max, &[probability("alpha", alpha)?])?;
        let first = bad.first();
        table.push(vec![
            alpha.into(),
            grid.m_max.into(),
            (grid.m_max - 2).into(),
            bad.len().into(),
            first.map_or(Cell::Empty, |v| v.m.into()),
            first.map_or(Cell::Empty, |v| Cell::Sci(v.g_m)),
            first.map_or(Cell::Empty, |v| Cell::Sci(v.g_next)),
            bad.is_empty().into(),
        ]);
        statuses.push(bad.is_empty());
    }
    Ok(verdict(table, "monotone", &statuses))
}

/// Quantile ratio against the gamma bound for each pair and α.
pub fn verify_lemma1(grid: &Lemma1Grid) -> Result<Verdict> {
    let pairs = grid.pairs.iter().map(|&(a, b)| Ok((dof(a)?, dof(b)?))).collect::<Result<Vec<_>>>()?;
    let alphas = grid.alphas.iter().map(|&a| probability("alpha", a)).collect::<Result<Vec<_>>>()?;
    let checks = check_quantile_ratio(&pairs, &alphas)?;
    let mut table = Table::new(&["d1", "d2", "alpha", "t_ratio", "bound", "status"]);
    for c in &checks {
        table.push(vec![c.d1.into(), c.d2.into(), c.alpha.into(), Cell::Sci(c.ratio), Cell::Sci(c.bound), c.holds().into()]);
    }
    let statuses: Vec<bool> = checks.iter().map(|c| c.holds()).collect();
    Ok(verdict(table, "lemma1", &statuses))
}

/// `H_λ < 0` on a log grid with `λ = lambda_scale × bound` for each pair.
pub fn verify_lemma2(grid: &Lemma2Grid) -> Result<Verdict> {
    if !(grid.x_min > 0.0 && grid.x_max > grid.x_min) || grid.points < 2 {
        return Err(CliError::usage("lemma2 grid needs 0 < x_min < x_max and at least 2 points"));
    }
    let xs = log_grid(grid.x_min, grid.x_max, grid.points);
    let mut table = Table::new(&["d1", "d2", "lambda", "bound", "points", "violations", "max_h", "x_at_max", "status"]);
    let mut statuses = Vec::new();
    for &(d1, d2) in &grid.pairs {
        let (d1, d2) = (dof(d1)?, dof(d2)?);
        let bound = lemma_ratio_bound(d1, d2)?;
        let lambda = grid.lambda_scale * bound;
        let pair = LemmaPair::new(d1, d2, lambda)?;
        let values: Vec<(f64, f64)> = xs.iter().map(|&x| (x, big_h_lambda(x, &pair))).collect();
        let violations = values.iter().filter(|(_, h)| !(*h < 0.0)).count();
        let (x_at_max, max_h) =
            values.iter().copied().fold((f64::NAN, f64::NEG_INFINITY), |acc, v| if v.1 > acc.1 { v } else { acc });
        table.push(vec![
            d1.get().into(),
            d2.get().into(),
            Cell::Sci(lambda),
            Cell::Sci(bound),
            xs.len().into(),
            violations.into(),
            Cell::Sci(max_h),
            Cell::Sci(x_at_max),
            (violations == 0).into(),
        ]);
        statuses.push(violations == 0);
    }
    Ok(verdict(table, "lemma2", &statuses))
}
