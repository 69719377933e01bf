//! `netfolio` command-line front end.
//!
//! Exit codes: 0 success, 2 configuration error, 3 data error, 4 solver failure.

mod commands;
mod config;
mod error;
mod output;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use netfolio::{ClusteringNormalization, CsvLayout, EstimatorKind, WindowUnit};

use crate::commands::Context;
use crate::config::{DataKind, Overrides, RunConfig};
use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "netfolio", version, about = "Network-based portfolio selection and backtesting")]
struct Cli {
    /// Run configuration (TOML, or JSON with a `.json` extension).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Directory every relative path is resolved against.
    #[arg(long, global = true)]
    workdir: Option<PathBuf>,

    /// Worker threads for window- and strategy-level parallelism.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(flatten)]
    overrides: OverrideArgs,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write sample, constant-correlation and shrunk covariances per window.
    Estimate {
        /// Only this window index.
        #[arg(long)]
        window: Option<usize>,
    },
    /// Write correlation network, clustering, C and H per window.
    Network {
        #[arg(long)]
        window: Option<usize>,
        /// Covariance estimate the network is built from.
        #[arg(long, default_value = "sample", value_parser = parse_estimator)]
        estimator: EstimatorKind,
    },
    /// Solve one allocation on a risk matrix file and print the weights.
    Solve {
        /// Square matrix CSV with a ticker header.
        #[arg(long)]
        matrix: PathBuf,
        /// gmv, erc, mdp or mv.
        #[arg(long, default_value = "gmv")]
        problem: String,
        /// `ticker,mu` CSV for mean-variance.
        #[arg(long)]
        mu: Option<PathBuf>,
    },
    /// Run the configured strategies out of sample and summarise them.
    Backtest,
    /// Rebuild the summary table from an earlier backtest's return files.
    Report,
}

#[derive(Debug, Args)]
struct OverrideArgs {
    /// Price or return CSV.
    #[arg(long, global = true)]
    data: Option<PathBuf>,
    /// wide or long.
    #[arg(long, global = true)]
    format: Option<CsvLayout>,
    /// prices or log-returns.
    #[arg(long, global = true, value_parser = parse_kind)]
    kind: Option<DataKind>,
    /// Comma-separated ticker subset.
    #[arg(long, global = true, value_delimiter = ',')]
    tickers: Option<Vec<String>>,
    /// In-sample length in the window unit.
    #[arg(long = "in-sample", short = 'n', global = true)]
    in_sample: Option<usize>,
    /// Out-of-sample length in the window unit.
    #[arg(long = "out-of-sample", short = 'k', global = true)]
    out_of_sample: Option<usize>,
    /// trading-days or calendar-months.
    #[arg(long, global = true)]
    unit: Option<WindowUnit>,
    /// Keep a shorter final out-of-sample period.
    #[arg(long, global = true)]
    allow_partial: bool,
    /// Comma-separated strategy labels, e.g. "NB-sample GMV,EW".
    #[arg(long, global = true, value_delimiter = ',')]
    specs: Option<Vec<String>>,
    /// Mean-variance trade-off for labels without one.
    #[arg(long, global = true)]
    lambda: Option<f64>,
    #[arg(long, global = true)]
    kkt_tolerance: Option<f64>,
    #[arg(long, global = true)]
    max_iterations: Option<usize>,
    #[arg(long, global = true)]
    erc_tolerance: Option<f64>,
    /// Per-day risk-free rate for the Sharpe ratio.
    #[arg(long, global = true)]
    risk_free: Option<f64>,
    /// Omega ratio threshold.
    #[arg(long, global = true)]
    omega_threshold: Option<f64>,
    /// Strategy label used as the information-ratio benchmark.
    #[arg(long, global = true)]
    reference: Option<String>,
    /// average or integral.
    #[arg(long, global = true, value_parser = parse_clustering)]
    clustering: Option<ClusteringNormalization>,
    /// Reset to target weights every day instead of buy-and-hold.
    #[arg(long, global = true)]
    rebalance_daily: bool,
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,
}

fn parse_estimator(s: &str) -> Result<EstimatorKind, String> {
    match s {
        "sample" => Ok(EstimatorKind::Sample),
        "shrinkage" => Ok(EstimatorKind::Shrinkage),
        _ => Err(format!("`{s}` is not sample or shrinkage")),
    }
}

fn parse_kind(s: &str) -> Result<DataKind, String> {
    match s {
        "prices" => Ok(DataKind::Prices),
        "log-returns" => Ok(DataKind::LogReturns),
        _ => Err(format!("`{s}` is not prices or log-returns")),
    }
}

fn parse_clustering(s: &str) -> Result<ClusteringNormalization, String> {
    match s {
        "average" => Ok(ClusteringNormalization::Average),
        "integral" => Ok(ClusteringNormalization::Integral),
        _ => Err(format!("`{s}` is not average or integral")),
    }
}

impl OverrideArgs {
    fn into_overrides(self) -> Overrides {
        Overrides {
            data: self.data,
            format: self.format,
            kind: self.kind,
            tickers: self.tickers,
            in_sample: self.in_sample,
            out_of_sample: self.out_of_sample,
            unit: self.unit,
            allow_partial: self.allow_partial,
            specs: self.specs,
            lambda: self.lambda,
            kkt_tolerance: self.kkt_tolerance,
            max_iterations: self.max_iterations,
            erc_tolerance: self.erc_tolerance,
            risk_free: self.risk_free,
            omega_threshold: self.omega_threshold,
            reference: self.reference,
            clustering: self.clustering,
            rebalance_daily: self.rebalance_daily,
            output_dir: self.output_dir,
        }
    }
}

fn context(
    config: Option<PathBuf>,
    workdir: PathBuf,
    overrides: &Overrides,
) -> Result<Context, CliError> {
    let mut cfg = match config {
        Some(path) => {
            let path = if path.is_absolute() { path } else { workdir.join(path) };
            RunConfig::load(&path)?
        }
        None => RunConfig::from_overrides(overrides)?,
    };
    cfg.apply(overrides);
    Ok(Context {
        config: cfg,
        workdir,
    })
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    }
    let workdir = cli.workdir.unwrap_or_else(|| PathBuf::from("."));
    let overrides = cli.overrides.into_overrides();

    match cli.command {
        Command::Solve {
            matrix,
            problem,
            mu,
        } => {
            let (solver, lambda) = match &cli.config {
                Some(_) => {
                    let ctx = context(cli.config, workdir.clone(), &overrides)?;
                    (ctx.config.solver, ctx.config.lambda)
                }
                None => {
                    let mut solver = netfolio::SolverConfig::default();
                    solver.kkt_tolerance = overrides.kkt_tolerance.unwrap_or(solver.kkt_tolerance);
                    solver.max_iterations = overrides.max_iterations.unwrap_or(solver.max_iterations);
                    solver.erc_tolerance = overrides.erc_tolerance.unwrap_or(solver.erc_tolerance);
                    (solver, overrides.lambda.unwrap_or(0.5))
                }
            };
            let resolve = |p: PathBuf| if p.is_absolute() { p } else { workdir.join(p) };
            let csv = commands::solve(
                &resolve(matrix),
                &problem,
                mu.map(resolve).as_deref(),
                lambda,
                &solver,
            )?;
            print_stdout(&csv)
        }
        Command::Estimate { window } => {
            commands::estimate(&context(cli.config, workdir, &overrides)?, window)
        }
        Command::Network { window, estimator } => commands::network(
            &context(cli.config, workdir, &overrides)?,
            window,
            estimator,
        ),
        Command::Backtest => commands::backtest(&context(cli.config, workdir, &overrides)?),
        Command::Report => {
            let csv = commands::report(&context(cli.config, workdir, &overrides)?)?;
            print_stdout(&csv)
        }
    }
}

fn print_stdout(text: &str) -> Result<(), CliError> {
    let mut out = std::io::stdout().lock();
    out.write_all(text.as_bytes())
        .and_then(|_| out.flush())
        .map_err(|e| CliError::io(std::path::Path::new("<stdout>"), e))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("netfolio: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
