//! Config-driven experiment runner for the `iogd` crate.
//!
//! Each invocation resolves a flat configuration (see [`config`]), runs one
//! command and writes CSV artifacts plus a `manifest.txt` listing every file
//! with its SHA-256, the config hash, the seed and tool versions.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod run;
mod selftest;

use std::path::PathBuf;

use clap::Parser;

pub use config::{Config, ConfigBuilder, ConfigError};
pub use run::{run_experiment, Report, RunError};

#[derive(Debug, Parser)]
#[command(name = "iogd", version, about = "Run inexact online gradient descent experiments")]
pub struct Args {
    /// lsq, track, mc, analyze or selftest; overrides `command` from the config.
    pub command: Option<String>,
    /// Config file of `key = value` assignments.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Override one key; repeatable, applied in order after the config file.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    /// Output directory.
    #[arg(long, value_name = "DIR", default_value = "out")]
    pub out: PathBuf,
    /// Seed; overrides every other source.
    #[arg(long, value_name = "N")]
    pub seed: Option<u64>,
    /// Start from a named parameter set: fig1, fig2, fig4 or movielens.
    #[arg(long, value_name = "NAME")]
    pub preset: Option<String>,
}

/// Layers preset, config file, positional command, `--set` and `--seed`.
pub fn resolve(args: &Args) -> Result<Config, RunError> {
    let mut builder = ConfigBuilder::new();
    if let Some(name) = &args.preset {
        builder.preset(name)?;
    }
    if let Some(path) = &args.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| RunError::Config(format!("cannot read {}: {e}", path.display())))?;
        builder.apply_text(&text)?;
    }
    if let Some(command) = &args.command {
        builder.set(&format!("command={command}"))?;
    }
    for assignment in &args.set {
        builder.set(assignment)?;
    }
    if let Some(seed) = args.seed {
        builder.set(&format!("seed={seed}"))?;
    }
    Ok(builder.build()?)
}

/// Runs the CLI and returns the process exit code.
pub fn main_with(args: &Args) -> i32 {
    let outcome = resolve(args).and_then(|config| run_experiment(&config, &args.out));
    match outcome {
        Ok(report) => {
            for note in &report.notes {
                eprintln!("note: {note}");
            }
            println!("wrote {} files to {}", report.files.len(), args.out.display());
            0
        }
        Err(e) => {
            eprintln!("iogd: {e}");
            e.exit_code()
        }
    }
}
