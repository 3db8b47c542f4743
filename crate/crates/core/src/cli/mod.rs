//! Command-line front end: config files, subcommands and reports.

mod config;
mod report;

use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use thiserror::Error;

pub use self::config::{component_specs, parse_config, ComponentSpec, Config, ConfigFile, Forms, Kind};
pub use self::report::{
    CaseJson, CharfnReport, CheckReport, CounterexampleReport, HarnessReport, OracleReport, Report, VerdictJson,
    WindowJson, WitnessJson,
};
use crate::error::Error;
use crate::independence::{check_independence, verification_window, DEFAULT_MARGIN_LOW};
use crate::oracle::{oracle_check, oracle_decide, oracle_window};
use crate::padic::{parse_rational, PAdicScalar, Prime};
use crate::theorem::{build_counterexample, classify, run_harness};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Read { path: String, source: io::Error },
    #[error("cannot write {path}: {source}")]
    Write { path: String, source: io::Error },
    #[error("config syntax error: {0}")]
    Syntax(String),
    #[error("invalid config: {0}")]
    Config(String),
    #[error(transparent)]
    Math(#[from] Error),
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    /// 2 for invalid input, 1 for failures of the tool itself.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Write { .. } | CliError::Internal(_) => 1,
            CliError::Math(Error::WindowTooLarge(_)) => 1,
            _ => 2,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "padic-indep", version, about = "Independence of linear forms of p-adic random variables")]
pub struct Cli {
    /// Machine-readable JSON output
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Classify alpha by its valuation and leading digit
    Classify {
        #[arg(short)]
        p: u64,
        #[arg(long, allow_hyphen_values = true)]
        alpha: String,
    },
    /// Decide independence of the linear forms of a config
    Check {
        #[arg(long)]
        config: PathBuf,
        /// Cross-check with the joint-law oracle
        #[arg(long)]
        oracle: bool,
        /// Extra random (u, v) pairs to evaluate
        #[arg(long, default_value_t = 0)]
        sample: usize,
        #[arg(long, default_value_t = DEFAULT_MARGIN_LOW)]
        margin_low: i64,
    },
    /// Build the non-idempotent independent pair for alpha = p^k
    Counterexample {
        #[arg(short)]
        p: u64,
        #[arg(short, allow_hyphen_values = true)]
        k: i64,
        #[arg(short, default_value = "1/2")]
        a: String,
        /// Write the pair as a config file
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate a characteristic function
    Charfn {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        at: String,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=2))]
        dist: u8,
    },
    /// Joint-law factorization on a finite quotient
    Oracle {
        #[arg(long)]
        config: PathBuf,
        /// Upper level W_high of the quotient
        #[arg(long, allow_hyphen_values = true)]
        level: Option<i64>,
    },
    /// Family sweeps and named examples
    Harness,
}

fn check(config_path: &PathBuf, with_oracle: bool, sample: usize, margin_low: i64) -> Result<Report, CliError> {
    let cfg = parse_config(config_path)?;
    let (alpha, mu1, mu2) = cfg.standard_forms()?;
    let window = verification_window(&mu1, &mu2, &alpha, margin_low)?;
    let verdict = check_independence(&mu1, &mu2, &alpha, &window, sample)?;
    let oracle = if with_oracle {
        let o = oracle_decide(&mu1, &mu2, &alpha)?;
        if o.conclusive && o.independent != verdict.independent {
            return Err(CliError::Internal("checker and oracle disagree".into()));
        }
        Some(VerdictJson::new(&o, &mu1, &mu2, &alpha)?)
    } else {
        None
    };
    Ok(Report::Check(CheckReport {
        p: cfg.prime.get(),
        alpha: alpha.to_string(),
        general_forms: matches!(cfg.forms, Forms::General { .. }),
        case: CaseJson::new(&classify(&alpha)?),
        mu1_idempotent: mu1.is_idempotent(),
        mu2_idempotent: mu2.is_idempotent(),
        verdict: VerdictJson::new(&verdict, &mu1, &mu2, &alpha)?,
        oracle,
    }))
}

fn counterexample(p: u64, k: i64, a: &str, out: Option<&PathBuf>) -> Result<Report, CliError> {
    let prime = Prime::new(p)?;
    let a = parse_rational(a)?;
    let (mu1, mu2) = build_counterexample(prime, k, &a)?;
    let alpha = PAdicScalar::p_power(prime, k);
    let cfg = Config { prime, forms: Forms::Standard(alpha.clone()), mu1, mu2 };
    let file = cfg.to_file();
    if let Some(path) = out {
        let text = serde_json::to_string_pretty(&file).map_err(|e| CliError::Internal(e.to_string()))?;
        std::fs::write(path, text + "\n")
            .map_err(|source| CliError::Write { path: path.display().to_string(), source })?;
    }
    let window = verification_window(&cfg.mu1, &cfg.mu2, &alpha, DEFAULT_MARGIN_LOW)?;
    let verdict = check_independence(&cfg.mu1, &cfg.mu2, &alpha, &window, 0)?;
    let oracle = oracle_decide(&cfg.mu1, &cfg.mu2, &alpha)?;
    Ok(Report::Counterexample(CounterexampleReport {
        p,
        k,
        a: crate::padic::format_rational(&a),
        alpha: alpha.to_string(),
        written_to: out.map(|p| p.display().to_string()),
        mu1_idempotent: cfg.mu1.is_idempotent(),
        mu2_idempotent: cfg.mu2.is_idempotent(),
        verdict: VerdictJson::new(&verdict, &cfg.mu1, &cfg.mu2, &alpha)?,
        oracle: VerdictJson::new(&oracle, &cfg.mu1, &cfg.mu2, &alpha)?,
        config: file,
    }))
}

fn charfn(config_path: &PathBuf, at: &str, dist: u8) -> Result<Report, CliError> {
    let cfg = parse_config(config_path)?;
    let y = PAdicScalar::parse(at, cfg.prime)?;
    let mu = if dist == 1 { &cfg.mu1 } else { &cfg.mu2 };
    let value = mu.charfn(&y)?;
    Ok(Report::Charfn(CharfnReport::new(cfg.prime.get(), &y, dist, &value)))
}

fn oracle(config_path: &PathBuf, level: Option<i64>) -> Result<Report, CliError> {
    let cfg = parse_config(config_path)?;
    let (alpha, mu1, mu2) = cfg.standard_forms()?;
    let mut window = oracle_window(&mu1, &mu2, &alpha)?;
    if let Some(level) = level {
        window.w_high = level;
    }
    let verdict = oracle_check(&mu1, &mu2, &alpha, &window)?;
    Ok(Report::Oracle(OracleReport {
        p: cfg.prime.get(),
        alpha: alpha.to_string(),
        verdict: VerdictJson::new(&verdict, &mu1, &mu2, &alpha)?,
    }))
}

pub fn run(cli: &Cli) -> Result<Report, CliError> {
    match &cli.command {
        Command::Classify { p, alpha } => {
            let prime = Prime::new(*p)?;
            let alpha = PAdicScalar::parse(alpha, prime)?;
            Ok(Report::Classify(CaseJson::new(&classify(&alpha)?)))
        }
        Command::Check { config, oracle, sample, margin_low } => check(config, *oracle, *sample, *margin_low),
        Command::Counterexample { p, k, a, out } => counterexample(*p, *k, a, out.as_ref()),
        Command::Charfn { config, at, dist } => charfn(config, at, *dist),
        Command::Oracle { config, level } => oracle(config, *level),
        Command::Harness => Ok(Report::Harness(HarnessReport::new(run_harness()?))),
    }
}

/// Parse arguments, run, print, and map the outcome to an exit code.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(report) => {
            let text = if cli.json { report.to_json() } else { report.to_text() };
            match text {
                Ok(text) => {
                    // a closed pipe on stdout is not a failure of the command
                    let _ = writeln!(io::stdout().lock(), "{text}");
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(e.exit_code())
                }
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
