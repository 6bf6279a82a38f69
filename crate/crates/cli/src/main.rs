//! `toric-spec`: Delzant polytopes, joint spectra of their quantizations,
//! and the inverse problem, from the command line.
//!
//! Exit codes: 0 success, 1 domain failure, 2 usage or parse failure.

mod commands;
mod files;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde::Serialize;

use commands::*;
use files::Touched;
use manifest::RunManifest;

#[derive(Debug)]
pub enum CliError {
    /// Unreadable or malformed input: exit 2.
    Usage(String),
    /// The input is well formed but the computation fails: exit 1.
    Domain(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Domain(m) => f.write_str(m),
        }
    }
}

impl From<toric_core::Error> for CliError {
    fn from(e: toric_core::Error) -> Self {
        match e {
            toric_core::Error::Parse(msg) => CliError::Usage(format!("parse error: {msg}")),
            other => CliError::Domain(other.to_string()),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "toric-spec", version, about = "Quantized toric systems: Delzant polytopes, joint spectra and spectral reconstruction")]
struct Cli {
    /// Where to write the run manifest (default: <out>.manifest.json, or
    /// toric-spec.manifest.json in the working directory).
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "snake_case")]
enum Command {
    /// Check the Delzant conditions, prequantization and half-form existence.
    Validate(ValidateArgs),
    /// Joint spectrum of the quantized system at level k.
    Spectrum(SpectrumArgs),
    /// Compare the lattice spectrum with the Fock-space oracle.
    Oracle(OracleArgs),
    /// Recover the polytope from spectrum clouds.
    Reconstruct(ReconstructArgs),
    /// Isomorphism verdict for two polytopes, plus a spectral comparison.
    Compare(CompareArgs),
    /// Weyl law table: eigenvalue count against k^n vol.
    Weyl(WeylArgs),
    /// Print a standard polytope as JSON.
    Library(LibraryArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Validate(_) => "validate",
            Command::Spectrum(_) => "spectrum",
            Command::Oracle(_) => "oracle",
            Command::Reconstruct(_) => "reconstruct",
            Command::Compare(_) => "compare",
            Command::Weyl(_) => "weyl",
            Command::Library(_) => "library",
        }
    }

    fn out(&self) -> Option<&std::path::Path> {
        match self {
            Command::Spectrum(a) => a.out.as_deref(),
            Command::Oracle(a) => a.out.as_deref(),
            Command::Reconstruct(a) => a.out.as_deref(),
            Command::Library(a) => a.out.as_deref(),
            _ => None,
        }
    }

    fn run(&self, touched: &mut Touched) -> Result<u8, CliError> {
        match self {
            Command::Validate(a) => validate(a, touched),
            Command::Spectrum(a) => spectrum(a, touched),
            Command::Oracle(a) => oracle(a, touched),
            Command::Reconstruct(a) => reconstruct(a, touched),
            Command::Compare(a) => compare(a, touched),
            Command::Weyl(a) => weyl(a, touched),
            Command::Library(a) => library_cmd(a, touched),
        }
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var("TORIC_SPEC_THREADS") else { return Ok(()) };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n >= 1)
        .ok_or_else(|| CliError::Usage(format!("TORIC_SPEC_THREADS must be a positive integer, got {value:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Domain(format!("thread pool: {e}")))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let start = Instant::now();
    let mut touched = Touched::default();
    let outcome = configure_threads().and_then(|()| cli.command.run(&mut touched));
    let (code, error) = match outcome {
        Ok(code) => (code, None),
        Err(CliError::Domain(msg)) => {
            eprintln!("{msg}");
            (1, Some(msg))
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("{msg}");
            (2, Some(msg))
        }
    };
    let config = serde_json::to_value(&cli.command).unwrap_or_default();
    let path = cli.manifest.clone().unwrap_or_else(|| manifest::default_path(cli.command.out()));
    let record = RunManifest::new(cli.command.name(), config, touched, code, error, start.elapsed());
    if let Err(e) = record.write(&path) {
        eprintln!("warning: could not write manifest {}: {e}", path.display());
    }
    ExitCode::from(code)
}
