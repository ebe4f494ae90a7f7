//! Experiment driver for `itp-core`: configuration, subcommands and output files.
//!
//! A run is computed entirely in memory ([`execute`]) and then written
//! ([`run`]), so identical configurations give byte-identical files.

pub mod commands;
pub mod config;
pub mod gen;
pub mod output;

use std::path::PathBuf;

use thiserror::Error;

pub use config::{parse, ConfigError, RunConfig, Subcommand};
pub use output::Artifact;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] itp_core::Error),
    #[error("cannot write {}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    /// 2 for bad input, 1 when a computation could not be carried out.
    pub fn exit_code(&self) -> u8 {
        use itp_core::Error as E;
        match self {
            CliError::Config(_) | CliError::Usage(_) => 2,
            CliError::Core(
                E::InvalidLevel(_)
                | E::InvalidPoly(_)
                | E::InvalidMeasure(_)
                | E::HeavyTail { .. }
                | E::ConflictingStab(_)
                | E::BaseMismatch(_)
                | E::InvalidCharacter(_)
                | E::MeasureMismatch
                | E::InvalidArgument(_),
            ) => 2,
            CliError::Core(_) | CliError::Io { .. } => 1,
        }
    }
}

/// Result of a subcommand before anything touches the filesystem.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub subcommand: Subcommand,
    pub pass: bool,
    /// One line per check, printed by the binary.
    pub summary: Vec<String>,
    pub artifacts: Vec<Artifact>,
}

impl Outcome {
    pub fn exit_code(&self) -> u8 {
        if self.pass {
            0
        } else {
            1
        }
    }
}

pub fn execute(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let sub = cfg.subcommand.ok_or_else(|| CliError::Usage("no subcommand given on the command line or in [run]".into()))?;
    let (pass, summary, artifacts) = match sub {
        Subcommand::AlgebraCheck => commands::algebra_check(cfg)?,
        Subcommand::Bochner => commands::bochner(cfg)?,
        Subcommand::Excess => commands::excess(cfg)?,
        Subcommand::Decompose => commands::decompose(cfg)?,
        Subcommand::Spectrum => commands::spectrum(cfg)?,
    };
    Ok(Outcome { subcommand: sub, pass, summary, artifacts })
}

/// Executes and writes the artifacts into `cfg.out`.
pub fn run(cfg: &RunConfig) -> Result<(Outcome, Vec<PathBuf>), CliError> {
    let outcome = execute(cfg)?;
    let files = output::write_all(&cfg.out, &outcome.artifacts)?;
    Ok((outcome, files))
}
