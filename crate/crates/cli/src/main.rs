mod args;
mod commands;

use std::path::Path;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use muellerkit::error::Error;
use serde::Deserialize;

use args::Cli;

/// Exit statuses.
pub const EXIT_OK: u8 = 0;
pub const EXIT_IO: u8 = 1;
pub const EXIT_FINDINGS: u8 = 2;
pub const EXIT_CONTRACT: u8 = 3;

/// Optional TOML defaults. Keys match the long flag names.
#[derive(Deserialize, Default, Debug)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct Config {
    pub workers: Option<u64>,
    pub clip: Option<f64>,
    pub tol_phys: Option<f64>,
    pub seed: Option<u64>,
    pub preview: Option<bool>,
    /// `false` behaves like `--no-project`.
    pub project: Option<bool>,
    pub fill: Option<f64>,
}

impl Config {
    fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::usage(format!("invalid config {}: {e}", path.display())))
    }
}

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub name: &'static str,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError { code: EXIT_IO, name: "Usage", message: message.into() }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Io(_)
            | Error::BadPath(_)
            | Error::BadMagic { .. }
            | Error::UnsupportedVersion(_)
            | Error::BadHeader(_)
            | Error::TruncatedFile { .. }
            | Error::DimOverflow
            | Error::TrailingData { .. }
            | Error::MissingPlane { .. }
            | Error::InvalidFraction(_)
            | Error::TooFewSpecimens(_)
            | Error::EmptyInput(_) => EXIT_IO,
            _ => EXIT_CONTRACT,
        };
        CliError { code, name: e.name(), message: e.to_string() }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e).into()
    }
}

fn workers(cli: &Cli, config: &Config) -> Result<Option<usize>, CliError> {
    if let Some(n) = cli.workers.or(config.workers) {
        if n == 0 {
            return Err(CliError::usage("worker count must be at least 1"));
        }
        return Ok(Some(n as usize));
    }
    match std::env::var("MUELLERKIT_WORKERS") {
        Ok(v) if !v.trim().is_empty() => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::usage(format!("MUELLERKIT_WORKERS={v:?} is not a positive integer"))),
        },
        _ => Ok(None),
    }
}

fn run(cli: Cli) -> Result<u8, CliError> {
    let config = match &cli.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    let workers = workers(&cli, &config)?;
    muellerkit::par::with_workers(workers, || commands::dispatch(cli.command, &config))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_IO),
            };
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error[{}]: {}", e.name, e.message);
            ExitCode::from(e.code)
        }
    }
}
