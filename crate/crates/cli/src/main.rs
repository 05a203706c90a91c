use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use groupci::commands::{self, CovarianceGrid, SimSettings, Verdict};
use groupci::dataset::{load_filter, Filter};
use groupci::exec::executor;
use groupci::grid::VerifyGrid;
use groupci::output::{emit, Format};
use groupci::{exit, fixture, CliError, Result};

#[derive(Parser)]
#[command(name = "ci", version, about = "n-case and m-case t intervals for a normal mean")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Output {
    /// Output format. `table` rounds to 2 decimals; the others keep full precision.
    #[arg(long, value_enum, default_value = "table")]
    format: Format,
    /// Write to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Intervals for one column of a CSV file.
    ///
    /// Prints the n-case interval and an m-case interval for each --m. The
    /// level defaults to alpha = 0.05; this is an assumption when reproducing
    /// an analysis whose level was not reported.
    Interval {
        /// CSV file with a header row.
        #[arg(long)]
        input: PathBuf,
        /// Column to analyse.
        #[arg(long)]
        column: String,
        /// Keep rows where COL equals VAL (string or numeric match).
        #[arg(long, value_name = "COL=VAL")]
        filter: Option<Filter>,
        /// Group counts, comma separated; each must divide the row count.
        /// Defaults to every divisor >= 2.
        #[arg(long = "m", value_delimiter = ',')]
        ms: Vec<usize>,
        /// Two-sided level is 1 - alpha. Default 0.05.
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        /// The column already holds group means; build the m-case interval from them.
        #[arg(long)]
        group_means: bool,
        #[command(flatten)]
        output: Output,
    },
    /// Closed-form expected lengths and limiting coverage.
    ///
    /// Without --k/--rho: expected m-case length under iid sampling for every
    /// divisor m of n. With --k and --rho: one row per (k, rho) with m = n/k.
    Theory {
        #[arg(long, default_value_t = 420)]
        n: usize,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[arg(long, default_value_t = 1.0)]
        sigma: f64,
        /// Group sizes, comma separated.
        #[arg(long = "k", value_delimiter = ',')]
        ks: Vec<usize>,
        /// Equi-correlations in [0, 1], comma separated.
        #[arg(long = "rho", value_delimiter = ',')]
        rhos: Vec<f64>,
        #[command(flatten)]
        output: Output,
    },
    /// Seeded Monte Carlo runs.
    Simulate {
        #[command(subcommand)]
        kind: SimKind,
    },
    /// Check inequalities on fixed grids; exit status 4 if any point fails.
    Verify {
        #[command(subcommand)]
        kind: VerifyKind,
    },
    /// Write the synthetic cohort CSV used in tests and examples.
    Fixture {
        #[arg(long, default_value_t = fixture::DEFAULT_SEED)]
        seed: u64,
        /// Write to this file instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct SimFlags {
    /// Total sample size per replication.
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0.0)]
    theta: f64,
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long)]
    reps: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads. Output does not depend on this.
    #[arg(long, default_value_t = 1)]
    workers: usize,
    #[command(flatten)]
    output: Output,
}

impl SimFlags {
    fn settings(&self) -> SimSettings {
        SimSettings {
            n: self.n,
            theta: self.theta,
            sigma: self.sigma,
            alpha: self.alpha,
            reps: self.reps,
            seed: self.seed,
        }
    }
}

#[derive(Subcommand)]
enum SimKind {
    /// Mean m-case length for each m under iid sampling (one shared sample per rep).
    Length {
        /// Group counts, comma separated. Defaults to every divisor >= 2 of n.
        #[arg(long = "m", value_delimiter = ',')]
        ms: Vec<usize>,
        #[command(flatten)]
        sim: SimFlags,
    },
    /// n-case (SP) and m-case coverage with correlated groups of size k.
    Coverage {
        /// Group sizes, comma separated.
        #[arg(long = "k", value_delimiter = ',')]
        ks: Vec<usize>,
        /// Equi-correlations in [0, 1], comma separated.
        #[arg(long = "rho", value_delimiter = ',')]
        rhos: Vec<f64>,
        /// Full k x k correlation matrix (CSV, no header) instead of --k/--rho.
        #[arg(long, conflicts_with_all = ["ks", "rhos"])]
        corr: Option<PathBuf>,
        #[command(flatten)]
        sim: SimFlags,
    },
}

#[derive(Args)]
struct VerifyFlags {
    /// TOML grid file; defaults to the bundled grid.
    #[arg(long)]
    grid: Option<PathBuf>,
    #[command(flatten)]
    output: Output,
}

#[derive(Subcommand)]
enum VerifyKind {
    /// The expected-length factor g(m) is strictly decreasing in m.
    Monotone {
        #[arg(long)]
        m_max: Option<u64>,
        #[arg(long = "alpha", value_delimiter = ',')]
        alphas: Vec<f64>,
        #[command(flatten)]
        flags: VerifyFlags,
    },
    /// t quantile ratios exceed the gamma-function bound.
    Lemma1 {
        #[arg(long = "alpha", value_delimiter = ',')]
        alphas: Vec<f64>,
        #[command(flatten)]
        flags: VerifyFlags,
    },
    /// H_lambda(x) < 0 on a log grid, lambda = scale x bound.
    Lemma2 {
        #[arg(long)]
        lambda_scale: Option<f64>,
        #[arg(long)]
        points: Option<usize>,
        #[command(flatten)]
        flags: VerifyFlags,
    },
}

fn write(table: &groupci::output::Table, output: &Output) -> Result<()> {
    emit(&table.render(output.format), output.out.as_deref())
}

fn report(name: &str, v: Verdict, output: &Output) -> Result<i32> {
    write(&v.table, output)?;
    let status = if v.passed { "PASS" } else { "FAIL" };
    eprintln!("verify {name}: {status} ({} checks)", v.checks);
    Ok(if v.passed { exit::OK } else { exit::VERIFY_FAILED })
}

fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Interval { input, column, filter, ms, alpha, group_means, output } => {
            let ds = load_filter(&input, filter.as_ref(), &column)?;
            let table = if group_means {
                if !ms.is_empty() {
                    return Err(CliError::usage("--m does not apply with --group-means"));
                }
                commands::group_means_table(&ds.values, alpha)?
            } else {
                commands::interval_table(&ds.values, &ms, alpha)?
            };
            write(&table, &output)?;
        }
        Command::Theory { n, alpha, sigma, ks, rhos, output } => {
            let table = match (ks.is_empty(), rhos.is_empty()) {
                (true, true) => commands::theory_table(n, alpha, sigma)?,
                (false, false) => commands::theory_cov_table(n, alpha, sigma, &ks, &rhos)?,
                _ => return Err(CliError::usage("--k and --rho go together")),
            };
            write(&table, &output)?;
        }
        Command::Simulate { kind: SimKind::Length { ms, sim } } => {
            let exec = executor(sim.workers)?;
            let (table, _) = commands::simulate_length(&sim.settings(), &ms, exec.as_ref())?;
            write(&table, &sim.output)?;
        }
        Command::Simulate { kind: SimKind::Coverage { ks, rhos, corr, sim } } => {
            let grid = match corr {
                Some(path) => CovarianceGrid::Matrix(commands::read_matrix(&path)?),
                None => CovarianceGrid::Equi { ks, rhos },
            };
            let exec = executor(sim.workers)?;
            let (table, _) = commands::simulate_coverage(&sim.settings(), &grid, exec.as_ref())?;
            write(&table, &sim.output)?;
        }
        Command::Verify { kind } => {
            return match kind {
                VerifyKind::Monotone { m_max, alphas, flags } => {
                    let mut g = VerifyGrid::load(flags.grid.as_deref())?.monotone;
                    g.m_max = m_max.unwrap_or(g.m_max);
                    if !alphas.is_empty() {
                        g.alphas = alphas;
                    }
                    report("monotone", commands::verify_monotone(&g)?, &flags.output)
                }
                VerifyKind::Lemma1 { alphas, flags } => {
                    let mut g = VerifyGrid::load(flags.grid.as_deref())?.lemma1;
                    if !alphas.is_empty() {
                        g.alphas = alphas;
                    }
                    report("lemma1", commands::verify_lemma1(&g)?, &flags.output)
                }
                VerifyKind::Lemma2 { lambda_scale, points, flags } => {
                    let mut g = VerifyGrid::load(flags.grid.as_deref())?.lemma2;
                    g.lambda_scale = lambda_scale.unwrap_or(g.lambda_scale);
                    g.points = points.unwrap_or(g.points);
                    report("lemma2", commands::verify_lemma2(&g)?, &flags.output)
                }
            };
        }
        Command::Fixture { seed, out } => emit(&fixture::generate(seed), out.as_deref())?,
    }
    Ok(exit::OK)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("ci: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
