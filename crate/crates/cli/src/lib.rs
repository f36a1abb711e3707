//! Command-line driver: ingest, stats, featurize, evaluate and relevance.
//!
//! Exit codes: 0 on success, 2 when the input or configuration is invalid,
//! 3 when a run fails after validation.

pub mod commands;
pub mod config;

use std::fmt;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use config::{RunArgs, RunConfig};
use grantscope_core::Error as CoreError;

pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "grantscope", version, about = "Grant productivity features, classifiers and feature relevance")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate a CSV/JSONL corpus and write it as canonical JSONL.
    Ingest(RunArgs),
    /// Print the productivity table per area.
    Stats(RunArgs),
    /// Write the feature matrix as CSV.
    Featurize(RunArgs),
    /// Cross-validate the configured algorithms.
    Evaluate(RunArgs),
    /// Rank features by forest impurity decrease and draw the rank diagram.
    Relevance(RunArgs),
}

impl Command {
    pub fn args(&self) -> &RunArgs {
        match self {
            Command::Ingest(a) | Command::Stats(a) | Command::Featurize(a) | Command::Evaluate(a) | Command::Relevance(a) => a,
        }
    }
}

/// Invalid configuration or input detected by the driver itself.
#[derive(Debug)]
pub struct Invalid(pub String);

impl fmt::Display for Invalid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Invalid {}

/// Some evaluation cells failed; the others were written.
#[derive(Debug)]
pub struct PartialFailure {
    pub failed: usize,
    pub total: usize,
    pub manifest: PathBuf,
}

impl fmt::Display for PartialFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} of {} evaluation cell(s) failed; see {}",
            self.failed,
            self.total,
            self.manifest.display()
        )
    }
}

impl std::error::Error for PartialFailure {}

fn core_exit_code(e: &CoreError) -> i32 {
    match e {
        CoreError::Io { .. } | CoreError::NonFiniteLoss { .. } | CoreError::LengthMismatch { .. } => EXIT_RUNTIME,
        CoreError::Csv(_)
        | CoreError::Json(_)
        | CoreError::MissingColumn(_)
        | CoreError::MalformedRow { .. }
        | CoreError::DuplicateGrantId { .. }
        | CoreError::EmptyCorpus
        | CoreError::EmptyClass(_)
        | CoreError::TooFewInstances { .. }
        | CoreError::InvalidParameter(_)
        | CoreError::EmptyDocument(_)
        | CoreError::MissingField { .. }
        | CoreError::UnsupportedModel(_)
        | CoreError::SchemaMismatch(_)
        | CoreError::UnsupportedRankCount { .. }
        | CoreError::Lexicon { .. } => EXIT_VALIDATION,
    }
}

/// Process exit code for a failed run.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    for cause in err.chain() {
        if cause.is::<Invalid>() {
            return EXIT_VALIDATION;
        }
        if cause.is::<PartialFailure>() {
            return EXIT_RUNTIME;
        }
        if let Some(e) = cause.downcast_ref::<CoreError>() {
            return core_exit_code(e);
        }
    }
    EXIT_RUNTIME
}

pub fn run(cli: &Cli) -> anyhow::Result<()> {
    let cfg = RunConfig::resolve(cli.command.args())?;
    let go = || -> anyhow::Result<()> {
        match &cli.command {
            Command::Ingest(_) => commands::ingest(&cfg).map(drop),
            Command::Stats(_) => commands::stats(&cfg).map(drop),
            Command::Featurize(_) => commands::featurize(&cfg).map(drop),
            Command::Evaluate(_) => commands::evaluate(&cfg).map(drop),
            Command::Relevance(_) => commands::relevance(&cfg).map(drop),
        }
    };
    match cfg.jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| anyhow::anyhow!("thread pool: {e}"))?
            .install(go),
        None => go(),
    }
}
