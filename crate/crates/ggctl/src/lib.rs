//! Scenario runner for the `ggkdv` controllability toolkit.
//!
//! `ggctl <scenario> --config <file> [--out <dir>] [--seed <n>] [--force]`
//! reads a versioned JSON configuration, runs one scenario and writes CSV
//! tables, a JSON summary (`summary.json`, echoing the fully resolved
//! configuration) and optional SVG plots into the output directory. Outputs
//! depend only on the configuration and the seed.

// Guards are written as `!(x > 0)` on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod output;
pub mod plot;
pub mod scenarios;

use std::path::PathBuf;

use serde::Serialize;

pub use config::{RunConfig, Scenario, SCHEMA_VERSION};
pub use error::{CliError, CliResult};

/// Command-line arguments.
#[derive(Debug, Clone, clap::Parser)]
#[command(name = "ggctl", version, about = "Boundary control scenarios for the Gear-Grimshaw system")]
pub struct Args {
    /// Scenario to run.
    #[arg(value_enum)]
    pub scenario: Scenario,
    /// JSON configuration file.
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory.
    #[arg(long, default_value = "ggctl-out")]
    pub out: PathBuf,
    /// Seed of all random draws (overrides the configuration).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Proceed at a critical length.
    #[arg(long)]
    pub force: bool,
}

/// The JSON summary written as `summary.json`.
#[derive(Debug, Serialize)]
pub struct Summary {
    pub tool: &'static str,
    pub version: &'static str,
    pub scenario: &'static str,
    pub config: RunConfig,
    pub warnings: Vec<String>,
    pub outputs: Vec<String>,
    pub result: serde_json::Value,
}

/// Runs one scenario and returns its summary (also written to disk).
pub fn run(args: &Args) -> CliResult<Summary> {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", args.config.display())))?;
    let raw = config::parse(&text)?;
    let seed = args.seed.unwrap_or(raw.seed);
    let rc = config::resolve(raw, seed)?;
    let mut out = output::OutDir::create(&args.out)?;
    let so = scenarios::run_scenario(args.scenario, &rc, args.force, &mut out)?;
    let mut warnings = so.warnings;
    if rc.raw.output.plots {
        warnings.extend(plot::emit_plots(&mut out, &so.plots)?);
    }
    let mut outputs = out.written().to_vec();
    outputs.push("summary.json".into());
    let summary = Summary {
        tool: "ggctl",
        version: env!("CARGO_PKG_VERSION"),
        scenario: args.scenario.name(),
        config: rc.raw.clone(),
        warnings,
        outputs,
        result: so.result,
    };
    out.json("summary.json", &summary)?;
    Ok(summary)
}
