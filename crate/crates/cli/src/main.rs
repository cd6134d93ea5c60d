//! `collatz-op`: command-line front end for the collatz-transfer library.
//!
//! Exit codes: 0 success, 1 usage or input error, 2 weight predicate
//! refusal, 3 budget overflow, 4 failed verification or refused computation.

mod commands;
mod config;
mod input;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::Value;

use collatz_transfer::Error;
use config::{parse_weight, Format, RunConfig};

#[derive(Parser, Debug)]
#[command(name = "collatz-op", version, about = "Collatz transfer operator computations")]
struct Cli {
    /// Weight: `bergman`, a descriptor JSON object, or a path to one.
    #[arg(long, global = true)]
    weight: Option<String>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Multiplies every internal budget.
    #[arg(long, global = true, default_value_t = 1.0)]
    budget: f64,
    /// JSON run configuration supplying defaults for the flags above.
    #[arg(long, global = true, env = "COLLATZ_OP_CONFIG")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// The map T, preimage trees and lemma sequences.
    #[command(subcommand)]
    Collatz(CollatzCmd),
    /// Iterate norms of 𝒯.
    #[command(subcommand)]
    Norm(NormCmd),
    /// Eigenvector fields h_m(μ, ·).
    #[command(subcommand)]
    Eig(EigCmd),
    /// Hypercyclic vectors with certificates.
    #[command(subcommand)]
    Hc(HcCmd),
    /// Invariant Gaussian mixtures and orbit statistics.
    #[command(subcommand)]
    Ergodic(ErgodicCmd),
}

#[derive(Subcommand, Debug)]
pub enum CollatzCmd {
    Orbit {
        #[arg(long)]
        k: String,
    },
    Preimages {
        #[arg(long)]
        k: String,
        /// Depth of the preimage tree.
        #[arg(long, default_value_t = 1)]
        n: usize,
    },
    Sequences {
        #[arg(long)]
        k: String,
        #[arg(long, value_enum, default_value = "density")]
        mode: input::Mode,
        #[arg(long, default_value_t = 10_000)]
        max_steps: usize,
    },
}

#[derive(Subcommand, Debug)]
pub enum NormCmd {
    /// Best n-step contribution over 3 <= k <= k_max (a lower bound).
    Scan {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1_000_000)]
        k_max: u64,
    },
    /// Exact ‖𝒯ⁿ‖² for the classic weight.
    Exact {
        #[arg(long)]
        n: usize,
    },
    /// Upper bounds ‖𝒯ⁿ‖^{1/n} on the spectral radius for n = 1..=n_max.
    Table {
        #[arg(long, default_value_t = 8)]
        n_max: usize,
    },
}

#[derive(Args, Debug)]
pub struct FieldArgs {
    #[arg(long)]
    pub m: u64,
    /// Rational complex, e.g. `1/2`, `3/5+4/5i`.
    #[arg(long, allow_hyphen_values = true)]
    pub mu: String,
    #[arg(long, default_value_t = 4096)]
    pub cap: u64,
}

#[derive(Subcommand, Debug)]
pub enum EigCmd {
    Materialize(FieldArgs),
    /// Residual of 𝒯h − μh on the safe window.
    Verify(FieldArgs),
    /// h_m(e^{iπα}) and its return times.
    Periodic {
        #[arg(long, default_value_t = 0)]
        m: u64,
        #[arg(long, allow_hyphen_values = true)]
        alpha: String,
        #[arg(long, default_value_t = 1 << 20)]
        cap: u64,
    },
    /// Eigenvectors with |μ| < 1 and |μ| > 1.
    Witnesses {
        #[arg(long)]
        rho: String,
        #[arg(long, default_value_t = 4096)]
        cap: u64,
    },
    /// Distance from z^k to the span of the given fields.
    Span {
        #[arg(long)]
        k: u64,
        /// `m:mu`, repeatable.
        #[arg(long = "field", required = true, allow_hyphen_values = true)]
        fields: Vec<String>,
        #[arg(long, default_value_t = 4096)]
        cap: u64,
    },
}

#[derive(Subcommand, Debug)]
pub enum HcCmd {
    Build {
        /// `deg:coeff,...` or a coefficient-vector JSON object; repeatable.
        #[arg(long = "target", allow_hyphen_values = true)]
        targets: Vec<String>,
        #[arg(long, default_value = "1/1000")]
        epsilon: String,
    },
    Verify {
        /// Certificate JSON file, `-` for stdin.
        #[arg(long)]
        certificate: PathBuf,
    },
}

#[derive(Args, Debug)]
pub struct ShapeArgs {
    #[arg(long, default_value_t = 3)]
    pub max_m: u64,
    #[arg(long, default_value_t = 4)]
    pub atoms_per_m: usize,
}

#[derive(Subcommand, Debug)]
pub enum ErgodicCmd {
    Sample {
        #[command(flatten)]
        shape: ShapeArgs,
        #[arg(long, default_value_t = 0)]
        run: u64,
        /// Also materialize the sample up to this degree.
        #[arg(long)]
        cap: Option<u64>,
    },
    /// Two-sample KS test of ⟨x, f⟩ against ⟨𝒯x, f⟩.
    Invariance {
        #[command(flatten)]
        shape: ShapeArgs,
        #[arg(long, default_value_t = 2000)]
        runs: usize,
        #[arg(long, default_value = "3:1,4:1/2-1/2i,10:i,16:-1+1/4i", allow_hyphen_values = true)]
        functional: String,
        /// Independent repetitions with seeds seed, seed+1, ...
        #[arg(long, default_value_t = 1)]
        experiments: u64,
        /// Compare against mismatch·𝒯x instead (1 is the true null).
        #[arg(long, default_value_t = 1.0)]
        mismatch: f64,
    },
    /// Fraction of 0 <= n <= horizon with ‖𝒯ⁿx − target‖ < eps.
    Visits {
        #[arg(long, allow_hyphen_values = true)]
        x: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        target: Option<String>,
        #[arg(long, conflicts_with = "x")]
        certificate: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        target_index: usize,
        /// Use the periodic point h_m(e^{iπα}) as both x and target.
        #[arg(long, conflicts_with_all = ["x", "certificate"], allow_hyphen_values = true)]
        periodic_alpha: Option<String>,
        #[arg(long, default_value_t = 0)]
        m: u64,
        #[arg(long, default_value_t = 1 << 30)]
        cap: u64,
        #[arg(long, default_value = "1/1000")]
        eps: String,
        #[arg(long, default_value_t = 100)]
        horizon: u64,
    },
}

/// What a command produced: always JSON, optionally a table for CSV.
pub struct Report {
    pub json: Value,
    pub table: Option<(Vec<&'static str>, Vec<Vec<String>>)>,
}

pub enum Failure {
    Usage(String),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Predicate { .. } => 2,
        Error::Budget { .. } => 3,
        Error::InvalidInput(_) | Error::Parse(_) | Error::ScalarKindMismatch { .. } => 1,
        Error::Inexact(_)
        | Error::Divergent(_)
        | Error::IllConditioned { .. }
        | Error::Certificate(_)
        | Error::EmptyWindow(_) => 4,
    }
}

fn emit(report: Report, format: Format) -> Result<(), Failure> {
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let io = |e: std::io::Error| Failure::Usage(format!("writing output: {e}"));
    match format {
        Format::Json => {
            let text = serde_json::to_string_pretty(&report.json).expect("serializable");
            writeln!(out, "{text}").map_err(io)?;
        }
        Format::Csv => {
            let (header, rows) = report
                .table
                .ok_or_else(|| Failure::Usage("this command has no CSV form; use --format json".into()))?;
            let mut w = csv::Writer::from_writer(out);
            let csv_err = |e: csv::Error| Failure::Usage(format!("writing csv: {e}"));
            w.write_record(&header).map_err(csv_err)?;
            for r in rows {
                w.write_record(&r).map_err(csv_err)?;
            }
            w.flush().map_err(io)?;
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    let mut cfg = RunConfig::load(cli.config.as_deref())?;
    if let Some(w) = &cli.weight {
        cfg.weight = parse_weight(w)?;
    }
    if let Some(f) = cli.format {
        cfg.format = f;
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if !(cli.budget.is_finite() && cli.budget > 0.0) {
        return Err(Failure::Usage(format!("--budget must be positive, got {}", cli.budget)));
    }
    cfg.budgets = cfg.budgets.scaled(cli.budget);
    let report = match cli.command {
        Command::Collatz(c) => commands::collatz(c, &cfg)?,
        Command::Norm(c) => commands::norm(c, &cfg)?,
        Command::Eig(c) => commands::eig(c, &cfg)?,
        Command::Hc(c) => commands::hc(c, &cfg)?,
        Command::Ergodic(c) => commands::ergodic(c, &cfg)?,
    };
    emit(report, cfg.format)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
