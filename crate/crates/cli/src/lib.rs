//! Command-line sweeps over the `spinchan` models.
//!
//! Every run resolves a [`RunConfig`], executes one subcommand and writes a
//! [`Report`] as CSV (with a `#` provenance header) or JSON. Exit status is
//! 0 on success, 2 for configuration problems and 3 for numerical failures.

pub mod commands;
pub mod config;
pub mod table;

use std::io::Write;

use clap::{Parser, Subcommand};

pub use config::{parse_header, Command, Flags, Format, RunConfig};
pub use table::{Cell, Report, Table};

pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Numerical(_) => EXIT_NUMERICAL,
        }
    }
}

impl From<spinchan::Error> for CliError {
    fn from(e: spinchan::Error) -> Self {
        match e {
            spinchan::Error::Numerical(msg) => CliError::Numerical(msg),
            other => CliError::Config(other.to_string()),
        }
    }
}

/// An error together with whatever rows were finished before it.
#[derive(Debug)]
pub struct Failure {
    pub partial: Option<Box<Report>>,
    pub error: CliError,
}

impl From<CliError> for Failure {
    fn from(error: CliError) -> Self {
        Failure { partial: None, error }
    }
}

#[derive(Debug, Parser)]
#[command(name = "spinchan", version, about = "Spin-chain state-transfer sweeps")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Sub,
}

#[derive(Debug, Subcommand)]
pub enum Sub {
    /// Coherent transfer amplitude and fidelity versus time
    Transfer(Flags),
    /// Fidelity under a common spin environment versus time
    CommonEnv(Flags),
    /// Local dephasing or damping: transfer probability and fidelity versus N
    Lindblad(Flags),
    /// Largest chain length beating the classical fidelity bound
    CriticalLength(Flags),
    /// Concurrence of a Bell pair sent down the chain versus time
    Entangle(Flags),
}

impl Sub {
    fn split(&self) -> (Command, &Flags) {
        match self {
            Sub::Transfer(f) => (Command::Transfer, f),
            Sub::CommonEnv(f) => (Command::CommonEnv, f),
            Sub::Lindblad(f) => (Command::Lindblad, f),
            Sub::CriticalLength(f) => (Command::CriticalLength, f),
            Sub::Entangle(f) => (Command::Entangle, f),
        }
    }
}

pub fn render(report: &Report, cfg: &RunConfig) -> Result<String, CliError> {
    let tables = std::iter::once(&report.main).chain(report.appendix.as_ref());
    for (table, name) in tables.zip(["main", "appendix"]) {
        if let Some(row) = table.first_non_finite() {
            return Err(CliError::Numerical(format!("non-finite value in {name} row {row}")));
        }
    }
    Ok(match cfg.format.unwrap_or(Format::Csv) {
        Format::Csv => report.to_csv(cfg),
        Format::Json => report.to_json(cfg),
    })
}

fn emit(text: &str, cfg: &RunConfig) -> Result<(), CliError> {
    match &cfg.out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::Config(format!("out: cannot write {}: {e}", path.display()))),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Config(format!("out: {e}"))),
    }
}

/// Runs a parsed command line and returns the process exit status.
pub fn run(cli: &Cli) -> i32 {
    let (command, flags) = cli.command.split();
    let result = RunConfig::resolve(command, flags).map_err(Failure::from).and_then(|cfg| {
        let outcome = commands::execute(&cfg);
        let report = match &outcome {
            Ok(r) => Some(r),
            Err(f) => f.partial.as_deref(),
        };
        if let Some(report) = report {
            render(report, &cfg).and_then(|text| emit(&text, &cfg))?;
        }
        outcome.map(|_| ())
    });
    match result {
        Ok(()) => 0,
        Err(f) => {
            let kind = match f.error {
                CliError::Config(_) => "configuration error",
                CliError::Numerical(_) => "numerical error",
            };
            eprintln!("spinchan: {kind}: {}", f.error);
            f.error.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn library_errors_map_to_exit_codes() {
        assert_eq!(CliError::from(spinchan::Error::Numerical("step size underflow".into())).exit_code(), 3);
        assert_eq!(CliError::from(spinchan::Error::Config("bad".into())).exit_code(), 2);
        assert_eq!(CliError::from(spinchan::Error::Validation("bad".into())).exit_code(), 2);
    }

    #[test]
    fn non_finite_output_is_a_numerical_failure() {
        let mut main = Table::new(vec!["x"]);
        main.push(vec![f64::INFINITY.into()]);
        let err = render(&Report { main, appendix: None }, &RunConfig::default()).unwrap_err();
        assert_eq!(err.exit_code(), EXIT_NUMERICAL);
    }
}
