//! Command-line front end for `powernarrow`.
//!
//! Frequencies cross this boundary in MHz. By default that is the ordinary
//! frequency `Ω/2π`; `--unit angular-mhz` switches every flag and column to
//! angular units of 10⁶ rad/s. The library works in rad/ns throughout.

pub mod commands;
pub mod config;
pub mod output;
pub mod plot;
pub mod verify;

use std::ffi::OsString;

use clap::{Parser, Subcommand};

use crate::config::{Flags, RunConfig};

#[derive(Debug)]
pub enum CliError {
    /// Bad arguments or configuration; exit code 2.
    Usage(String),
    /// Failed computation; exit code 1.
    Compute(powernarrow::Error),
    /// File or stream failure; exit code 1.
    Io(String),
    /// `verify` found failing checks; exit code 1.
    Failed(usize),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Compute(e) => write!(f, "{e}"),
            CliError::Io(m) => write!(f, "{m}"),
            CliError::Failed(n) => write!(f, "{n} check(s) failed"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<powernarrow::Error> for CliError {
    fn from(e: powernarrow::Error) -> Self {
        match e {
            powernarrow::Error::InvalidArgument(m) => CliError::Usage(m),
            powernarrow::Error::UnsupportedShape(s) => CliError::Usage(format!("operation not supported for the {s} shape")),
            other => CliError::Compute(other),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "powernarrow", version, about = "Excitation profiles of shaped two-level pulses")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Excitation against detuning at each of --areas
    Profile,
    /// Excitation over the (Ω₀, Δ) grid
    Landscape,
    /// Excitation against Ω₀ at fixed --detuning
    Slice,
    /// Line widths at --areas for each power in --ns
    FwhmTable,
    /// Power-law fit of width against Ω₀ over --areas (π excluded)
    Scaling,
    /// Peak widths for each truncation level in --cuts
    CutoffStudy,
    /// Hardware waveform samples on the 2/9 ns grid, as JSON
    ExportSamples,
    /// Oracle and invariant checks
    Verify,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Profile => "profile",
            Command::Landscape => "landscape",
            Command::Slice => "slice",
            Command::FwhmTable => "fwhm-table",
            Command::Scaling => "scaling",
            Command::CutoffStudy => "cutoff-study",
            Command::ExportSamples => "export-samples",
            Command::Verify => "verify",
        }
    }
}

/// Parses `argv`, runs the command and returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if let CliError::Usage(_) = e {
                eprintln!("run `powernarrow {} --help` for usage", cli.command.name());
            }
            e.exit_code()
        }
    }
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    let config = RunConfig::resolve(cli.command.name(), &cli.flags)?;
    if cli.flags.print_config {
        let mut text = serde_json::to_string_pretty(&config).map_err(|e| CliError::Io(e.to_string()))?;
        text.push('\n');
        print!("{text}");
        return Ok(());
    }
    match cli.command {
        Command::Profile => commands::profile(&config),
        Command::Landscape => commands::landscape(&config),
        Command::Slice => commands::slice(&config),
        Command::FwhmTable => commands::fwhm_table(&config),
        Command::Scaling => commands::scaling(&config),
        Command::CutoffStudy => commands::cutoff_study(&config),
        Command::ExportSamples => commands::export_samples(&config),
        Command::Verify => verify::run(&config),
    }
}
