//! Command-line flags and the TOML file that overrides them.

use std::fs;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use kempeflip::chains::ChainKind;
use kempeflip::harness::{ExperimentConfig, ExperimentKind, GraphSpec, ParamSpec};
use kempeflip::Preset;

/// Where the graph of an experiment comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum GraphSource {
    /// The single-neighbor tree on `1 + 2Δ` vertices.
    G1,
    /// The paired tree on `1 + 3Δ` vertices (`Δ` even).
    G2,
    /// A random graph with maximum degree at most `Δ`.
    Random,
    /// A path on `n` vertices.
    Path,
    /// An edge-list file given by `--graph-file`.
    File,
}

/// Flags shared by every subcommand; each mirrors a field of
/// [`ExperimentConfig`].
#[derive(Debug, Args)]
pub struct Options {
    /// TOML file whose keys override the flags.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Directory for the CSV table and the JSON summary.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Seed of all randomness.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Independent trials.
    #[arg(long, global = true)]
    pub trials: Option<u64>,
    /// Number of colors (defaults to just below the 11Δ/6 threshold).
    #[arg(long, global = true)]
    pub k: Option<usize>,
    /// Flip-parameter preset: vigoda_eq11, cm_eq12 or dpp_obs51.
    #[arg(long, global = true, conflicts_with = "params")]
    pub preset: Option<Preset>,
    /// Flip-parameter file with one `alpha p_alpha` pair per line.
    #[arg(long, global = true)]
    pub params: Option<PathBuf>,
    /// Graph source.
    #[arg(long, global = true, value_enum)]
    pub graph: Option<GraphSource>,
    /// Maximum degree for the constructions and random graphs.
    #[arg(long, global = true)]
    pub delta: Option<usize>,
    /// Vertex count for random graphs and paths.
    #[arg(long, global = true)]
    pub n: Option<usize>,
    /// Edge-list file (implies `--graph file`).
    #[arg(long, global = true)]
    pub graph_file: Option<PathBuf>,
    /// Step cap for coupling and coalescence runs.
    #[arg(long, global = true)]
    pub step_cap: Option<u64>,
    /// Chain steps per trial for the sampling experiments.
    #[arg(long, global = true)]
    pub steps: Option<u64>,
    /// Chain for `sample`: flip, glauber, list_flip or list_glauber.
    #[arg(long, global = true)]
    pub chain: Option<ChainKind>,
    /// Program for `verify-lp`: lp1 to lp5, or lp5:<gamma>.
    #[arg(long, global = true)]
    pub lp: Option<String>,
    /// List size for `list-sample`.
    #[arg(long, global = true)]
    pub list_size: Option<usize>,
    /// Graph sizes for `mixing`, comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    pub sizes: Option<Vec<usize>>,
}

const DEFAULT_DELTA: usize = 6;
const DEFAULT_N: usize = 32;

fn read(path: &PathBuf) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn graph_from_flags(options: &Options, fallback: GraphSpec) -> Result<GraphSpec> {
    let source = match (options.graph, &options.graph_file) {
        (Some(source), _) => source,
        (None, Some(_)) => GraphSource::File,
        (None, None) if options.delta.is_none() && options.n.is_none() => return Ok(fallback),
        (None, None) if options.n.is_some() => GraphSource::Random,
        (None, None) => match fallback {
            GraphSpec::G1 { .. } => GraphSource::G1,
            _ => GraphSource::G2,
        },
    };
    let delta = options.delta.unwrap_or(DEFAULT_DELTA);
    let n = options.n.unwrap_or(DEFAULT_N);
    Ok(match source {
        GraphSource::G1 => GraphSpec::G1 { delta },
        GraphSource::G2 => GraphSpec::G2 { delta },
        GraphSource::Random => GraphSpec::Random { n, delta },
        GraphSource::Path => GraphSpec::Path { n },
        GraphSource::File => match &options.graph_file {
            Some(path) => GraphSpec::EdgeList { text: read(path)? },
            None => bail!("--graph file needs --graph-file"),
        },
    })
}

/// The graph each subcommand uses when no graph flag is given.
fn default_graph(kind: ExperimentKind) -> GraphSpec {
    match kind {
        ExperimentKind::Sample | ExperimentKind::ListSample => GraphSpec::Path { n: 6 },
        ExperimentKind::Mixing | ExperimentKind::Contract => GraphSpec::Random { n: DEFAULT_N, delta: 3 },
        ExperimentKind::Construct => GraphSpec::G1 { delta: DEFAULT_DELTA },
        _ => GraphSpec::G2 { delta: DEFAULT_DELTA },
    }
}

/// Builds the configuration from the flags.
pub fn from_flags(kind: ExperimentKind, options: &Options) -> Result<ExperimentConfig> {
    let defaults = ExperimentConfig::default();
    let params = match (&options.params, options.preset) {
        (Some(path), _) => ParamSpec::Text(read(path)?),
        (None, Some(preset)) => ParamSpec::Preset(preset),
        (None, None) => defaults.params.clone(),
    };
    Ok(ExperimentConfig {
        kind,
        graph: graph_from_flags(options, default_graph(kind))?,
        k: options.k,
        params,
        trials: options.trials.unwrap_or(defaults.trials),
        seed: options.seed.unwrap_or(defaults.seed),
        step_cap: options.step_cap.unwrap_or(defaults.step_cap),
        steps: options.steps.unwrap_or(defaults.steps),
        chain: options.chain.unwrap_or(defaults.chain),
        lp: options.lp.clone().unwrap_or(defaults.lp),
        list_size: options.list_size,
        sizes: options.sizes.clone().unwrap_or(defaults.sizes),
    })
}

/// Applies the keys of a TOML document on top of `cfg`.
///
/// Top-level keys replace the corresponding fields wholesale. The
/// subcommand fixes the experiment kind, so a conflicting `kind` is an
/// error; an `out` key sets the output directory.
pub fn apply_file(cfg: ExperimentConfig, text: &str) -> Result<(ExperimentConfig, Option<PathBuf>)> {
    let mut file: toml::Table = text.parse().context("parsing the configuration file")?;
    let out = match file.remove("out") {
        Some(toml::Value::String(path)) => Some(PathBuf::from(path)),
        Some(other) => bail!("`out` must be a path, found {other}"),
        None => None,
    };
    let kind = cfg.kind;
    let mut merged = toml::Table::try_from(&cfg).context("encoding the flag configuration")?;
    merged.extend(file);
    let merged: ExperimentConfig = merged.try_into().context("invalid configuration file")?;
    if merged.kind != kind {
        bail!("the configuration file sets kind {:?} but the subcommand runs {:?}", merged.kind, kind);
    }
    Ok((merged, out))
}

/// Flags first, then the configuration file on top.
pub fn resolve(kind: ExperimentKind, options: &Options) -> Result<(ExperimentConfig, Option<PathBuf>)> {
    let cfg = from_flags(kind, options)?;
    match &options.config {
        Some(path) => {
            let (cfg, out) = apply_file(cfg, &read(path)?)?;
            Ok((cfg, out.or_else(|| options.out.clone())))
        }
        None => Ok((cfg, options.out.clone())),
    }
}
