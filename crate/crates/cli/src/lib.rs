//! Batch front-end for `isosec-core`: sample transforms, the plateau
//! counterexample and the verification suites, with JSON reports.
//!
//! Exit codes: 0 when every assertion passes, 2 when one fails, 3 for bad
//! input (flags, config, CSV, inadmissible parameters).

// `!(x > 0)` is used on purpose so NaN inputs are rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod report;
pub mod suites;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use thiserror::Error;

pub use config::{RunConfig, Tolerances};
pub use report::{Report, ReportRow};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 2;
pub const EXIT_INPUT: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Core(#[from] isosec_core::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn message(&self) -> String {
        self.to_string()
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "isosec",
    version,
    about = "Integral geometry on the 2-sphere: transforms, zonoids and verification suites"
)]
pub struct Cli {
    /// key = value configuration file
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Grid size as N_THETA,N_PHI
    #[arg(long, global = true, value_name = "T,P")]
    pub grid: Option<String>,
    /// Band limit L
    #[arg(long, global = true)]
    pub band: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Transform grid samples read from a `theta,phi,weight,value` CSV
    Transform {
        #[arg(value_enum)]
        which: Which,
        #[arg(long)]
        input: PathBuf,
        /// Defaults to standard output
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Build the plateau counterexample and write its artifacts
    Counterexample,
    /// Run a verification suite and print its JSON report
    Verify {
        #[arg(long, value_enum, default_value = "all")]
        suite: Suite,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Which {
    Cosine,
    Funk,
    Symmetrize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Newton,
    Af,
    Sr,
    Lemma41,
    Rigidity,
    MinkowskiRev,
    Umbilic,
    All,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Newton => "newton",
            Suite::Af => "af",
            Suite::Sr => "sr",
            Suite::Lemma41 => "lemma41",
            Suite::Rigidity => "rigidity",
            Suite::MinkowskiRev => "minkowski-rev",
            Suite::Umbilic => "umbilic",
            Suite::All => "all",
        }
    }
}

/// Config file first, then command-line overrides.
pub fn resolve_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| CliError::Input(format!("cannot read config {}: {e}", p.display())))?;
            RunConfig::parse(&text)?
        }
        None => RunConfig::default(),
    };
    if let Some(g) = &cli.grid {
        let (t, p) = g
            .split_once(',')
            .ok_or_else(|| CliError::Input(format!("--grid expects T,P, got `{g}`")))?;
        cfg.set("n_theta", t.trim())?;
        cfg.set("n_phi", p.trim())?;
    }
    if let Some(b) = cli.band {
        cfg.band = b;
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(o) = &cli.out {
        cfg.out = o.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Parse `args` (program name first) and run; returns the exit code.
pub fn run<I, A>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = A>,
    A: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_PASS };
            let _ = if e.use_stderr() {
                write!(err, "{}", e.render())
            } else {
                write!(out, "{}", e.render())
            };
            return code;
        }
    };
    let result = resolve_config(&cli).and_then(|cfg| match &cli.command {
        Command::Transform { which, input, output } => commands::transform(&cfg, *which, input, output.as_deref(), out),
        Command::Counterexample => commands::counterexample(&cfg, out),
        Command::Verify { suite } => commands::verify(&cfg, *suite, out),
    });
    match result {
        Ok(true) => EXIT_PASS,
        Ok(false) => EXIT_FAIL,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_INPUT
        }
    }
}
