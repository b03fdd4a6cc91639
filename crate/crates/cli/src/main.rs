//! `qpolar`: polar decomposition, singular-space analysis and lower-bound
//! certification for accretive quadratic symbols.
//!
//! Exit codes: 0 on success/PASS, 2 when a certification or residual check
//! fails, 1 on input errors.

mod commands;
mod input;
mod report;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::input::{digest, load_directions, load_example, load_file};
use crate::report::{to_json, Map, Node};

#[derive(Parser)]
#[command(name = "qpolar", version, about = "Polar decomposition of accretive quadratic semigroups")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Singular space, k0, V_k dimensions and direction indices
    Analyze(Common),
    /// Polar factors, residuals and Mehler symbol at one or more times
    Decompose {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        times: Times,
    },
    /// Certify the anisotropic lower bound over a t-grid
    Certify {
        #[command(flatten)]
        common: Common,
        /// Grid `start:stop:N[log|lin]`
        #[arg(long, default_value = "1e-3:1e-1:12log")]
        t_grid: String,
    },
    /// Smoothing-exponent and subelliptic tables
    Report {
        #[command(flatten)]
        common: Common,
        /// Comma-separated weights of the p_k sums (unit weights by default)
        #[arg(long, value_delimiter = ',')]
        weights: Option<Vec<f64>>,
    },
}

#[derive(Args)]
struct Common {
    /// Symbol document (JSON with n, Q_re, Q_im)
    #[arg(long, conflicts_with = "example", required_unless_present = "example")]
    input: Option<PathBuf>,
    /// Built-in example: harmonic[:n], kfp[:n], kolmogorov, ou, random:n[:seed]
    #[arg(long)]
    example: Option<String>,
    #[arg(long, default_value_t = 1e-9)]
    rank_tol: f64,
    /// Bound on every residual for a decomposition to pass
    #[arg(long, default_value_t = 1e-8)]
    res_tol: f64,
    /// Seed for `random:n` examples
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// JSON list of direction vectors
    #[arg(long)]
    directions: Option<PathBuf>,
}

#[derive(Args)]
#[group(multiple = false)]
struct Times {
    /// Single time (default 0.5)
    #[arg(long)]
    t: Option<f64>,
    /// Grid `start:stop:N[log|lin]`
    #[arg(long)]
    t_grid: Option<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

fn write_csv(rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::Writer::from_writer(std::io::stdout().lock());
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Runs a command; `Ok(Some(false))` means a failed verdict.
fn run(cli: Cli) -> Result<Option<bool>> {
    let (name, common) = match &cli.command {
        Command::Analyze(c) => ("analyze", c),
        Command::Decompose { common, .. } => ("decompose", common),
        Command::Certify { common, .. } => ("certify", common),
        Command::Report { common, .. } => ("report", common),
    };
    anyhow::ensure!(common.rank_tol > 0.0, "--rank-tol must be positive");
    let loaded = match (&common.input, &common.example) {
        (Some(p), _) => load_file(p)?,
        (None, Some(e)) => load_example(e, common.seed)?,
        (None, None) => unreachable!("clap requires --input or --example"),
    };
    for w in &loaded.warnings {
        eprintln!("warning: {w}");
    }
    let q = &loaded.symbol;
    let directions = common.directions.as_deref().map(|p| load_directions(p, q.dim())).transpose()?;
    let dirs = directions.as_deref();

    let mut params = Map::new();
    params.insert("rank_tol", common.rank_tol).insert("res_tol", common.res_tol);
    let outcome = match &cli.command {
        Command::Analyze(_) => commands::analyze(q, common.rank_tol, dirs)?,
        Command::Decompose { times, .. } => {
            let ts = match (&times.t, &times.t_grid) {
                (_, Some(spec)) => commands::parse_grid(spec).context("parsing --t-grid")?,
                (Some(t), None) => vec![*t],
                (None, None) => vec![0.5],
            };
            params.insert("times", ts.clone());
            commands::decompose(q, &ts, common.res_tol)?
        }
        Command::Certify { t_grid, .. } => {
            let grid = commands::parse_grid(t_grid).context("parsing --t-grid")?;
            params.insert("t_grid", t_grid.as_str());
            commands::certify(q, &grid, common.rank_tol, dirs)?
        }
        Command::Report { weights, .. } => commands::report(q, common.rank_tol, dirs, weights.as_deref())?,
    };

    match common.format {
        Format::Json => {
            let report: Node = Map::new()
                .with("command", name)
                .with("version", format!("qpolar {}", env!("CARGO_PKG_VERSION")))
                .with("seed", common.seed)
                .with(
                    "input",
                    Map::new()
                        .with("source", loaded.source.as_str())
                        .with("digest", digest(q))
                        .with("n", q.n())
                        .with("warnings", loaded.warnings.clone()),
                )
                .with("parameters", params)
                .with("results", outcome.results)
                .with("passed", outcome.passed)
                .into();
            let mut out = std::io::stdout().lock();
            out.write_all(to_json(&report).as_bytes())?;
            out.flush()?;
        }
        Format::Csv => write_csv(&outcome.csv)?,
    }
    Ok(outcome.passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(Some(false)) => ExitCode::from(2),
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
