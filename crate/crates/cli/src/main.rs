//! `kempeflip`: batch experiments on the flip dynamics, its couplings and
//! the linear programs that certify contraction.
//!
//! Every subcommand builds an [`ExperimentConfig`] from its flags, lets an
//! optional TOML file override any of those fields, runs it, prints a JSON
//! summary on stdout and, with `--out`, writes the per-trial table as CSV
//! next to the summary.

mod settings;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use kempeflip::harness::{
    experiment_program, run_experiment, ExperimentConfig, ExperimentKind, ExperimentResult, SummaryValue,
};
use serde::Serialize;

use crate::settings::Options;

/// Sampling, coupling and LP experiments for Kempe-flip dynamics.
#[derive(Debug, Parser)]
#[command(name = "kempeflip", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    options: Options,
    /// Worker threads for trial-level parallelism (all cores when unset).
    #[arg(long, global = true, env = "KEMPEFLIP_WORKERS")]
    workers: Option<usize>,
}

#[derive(Clone, Copy, Debug, Subcommand)]
enum Command {
    /// Run a chain from a greedy coloring and report the final states.
    Sample,
    /// Solve a program of the LP family and report its optimum and tight rows.
    VerifyLp,
    /// Run variable-length couplings from a neighboring pair.
    Couple,
    /// Tabulate the stage transitions of one tracked color.
    Stages,
    /// Estimate coalescence times on random graphs of several sizes.
    Mixing,
    /// Build a construction and list its configurations.
    Construct,
    /// Evaluate the metric drift on sampled neighboring pairs.
    Contract,
    /// Run a list-coloring chain with random lists.
    ListSample,
}

impl Command {
    fn kind(self) -> ExperimentKind {
        match self {
            Command::Sample => ExperimentKind::Sample,
            Command::VerifyLp => ExperimentKind::VerifyLp,
            Command::Couple => ExperimentKind::Couple,
            Command::Stages => ExperimentKind::Stages,
            Command::Mixing => ExperimentKind::Mixing,
            Command::Construct => ExperimentKind::Construct,
            Command::Contract => ExperimentKind::Contract,
            Command::ListSample => ExperimentKind::ListSample,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Command::Sample => "sample",
            Command::VerifyLp => "verify-lp",
            Command::Couple => "couple",
            Command::Stages => "stages",
            Command::Mixing => "mixing",
            Command::Construct => "construct",
            Command::Contract => "contract",
            Command::ListSample => "list-sample",
        }
    }
}

/// The JSON summary written for every run; the table itself goes to CSV.
#[derive(Serialize)]
struct Report<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    workers: usize,
    config: &'a ExperimentConfig,
    preset: &'a str,
    elapsed_ms: u128,
    summary: &'a BTreeMap<String, SummaryValue>,
    columns: &'a [String],
    rows: usize,
    csv: Option<PathBuf>,
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    if let Some(workers) = cli.workers {
        anyhow::ensure!(workers > 0, "the worker count must be at least 1");
        rayon::ThreadPoolBuilder::new().num_threads(workers).build_global().context("starting the worker pool")?;
    }
    let (cfg, out) = settings::resolve(cli.command.kind(), &cli.options)?;
    let result = run_experiment(&cfg).with_context(|| format!("running {}", cli.command.name()))?;

    let mut csv_path = None;
    if let Some(dir) = &out {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let path = dir.join(format!("{}.csv", cli.command.name()));
        write_table(&path, &result)?;
        csv_path = Some(path);
        if cfg.kind == ExperimentKind::VerifyLp {
            let program = experiment_program(&cfg)?;
            let path = dir.join(format!("{}.lp", cfg.lp.replace(':', "_")));
            fs::write(&path, program.to_lp_text()).with_context(|| format!("writing {}", path.display()))?;
        }
    }
    let report = Report {
        tool: env!("CARGO_BIN_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        command: cli.command.name(),
        workers: rayon::current_num_threads(),
        config: &result.config,
        preset: &result.preset,
        elapsed_ms: result.elapsed_ms,
        summary: &result.summary,
        columns: &result.header,
        rows: result.rows.len(),
        csv: csv_path,
    };
    let json = serde_json::to_string_pretty(&report)?;
    if let Some(dir) = &out {
        let path = dir.join(format!("{}.json", cli.command.name()));
        fs::write(&path, &json).with_context(|| format!("writing {}", path.display()))?;
    }
    println!("{json}");
    Ok(())
}

fn write_table(path: &Path, result: &ExperimentResult) -> Result<()> {
    let mut writer = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    writer.write_record(&result.header)?;
    for row in &result.rows {
        writer.write_record(row)?;
    }
    writer.flush()?;
    Ok(())
}
