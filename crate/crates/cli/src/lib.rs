//! Command-line front end: dataset generation, indexing, querying,
//! benchmark sweeps and cost-model tables.

pub mod args;
pub mod cmd;
mod common;

use std::ffi::OsString;
use std::fmt;
use std::process::ExitCode;

use clap::Parser;

pub use args::{Cli, Command};

/// Process exit statuses.
pub mod exit {
    pub const OK: u8 = 0;
    pub const FAILURE: u8 = 1;
    pub const VERIFY_MISMATCH: u8 = 1;
    pub const USAGE: u8 = 2;
    pub const RESOURCE_CAP: u8 = 3;
}

/// A bad flag value or combination discovered after parsing.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

/// An algorithm disagreed with the brute-force oracle.
#[derive(Debug)]
pub struct VerifyMismatch(pub String);

impl fmt::Display for VerifyMismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "verification failed: {}", self.0)
    }
}

impl std::error::Error for VerifyMismatch {}

/// Maps an error chain to its exit status.
pub fn exit_status(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<subsky::Error>() {
            return match e {
                subsky::Error::ResourceCap { .. } => exit::RESOURCE_CAP,
                _ => exit::USAGE,
            };
        }
        if cause.is::<UsageError>() || cause.is::<std::io::Error>() {
            return exit::USAGE;
        }
        if cause.is::<VerifyMismatch>() {
            return exit::VERIFY_MISMATCH;
        }
    }
    exit::FAILURE
}

pub fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Gen(a) => cmd::gen::run(&a),
        Command::Index(a) => cmd::index::run(&a),
        Command::Query(a) => cmd::query::run(&a),
        Command::Bench(a) => cmd::bench::run(&a),
        Command::Cost(a) => cmd::cost::run(&a),
    }
}

/// Parses `args`, runs the command and reports failures on stderr.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() {
                exit::USAGE
            } else {
                exit::OK
            });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::from(exit::OK),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_status(&e))
        }
    }
}
