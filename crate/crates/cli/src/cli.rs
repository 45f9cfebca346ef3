//! Argument parsing and dispatch.

use std::io::{self, Write};
use std::path::PathBuf;

use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand};
use qillum::{BatchConfig, DetectionMode, Fidelity, ReceiverKind, ScenarioParams, ThresholdMode};

use crate::commands::{
    self, Figure, OutputFormat, ReproduceOptions, ResolvedConfig, DEFAULT_EXPERIMENTS,
    FULL_EXPERIMENTS,
};
use crate::output::OutputDir;
use crate::scenario_file::load_scenario;

#[derive(Debug, Parser)]
#[command(name = "qillum", version, about = "Classical and quantum illumination detection simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form error probabilities, trial counts, photon budgets and bandwidths.
    Theory(TheoryArgs),
    /// Monte Carlo batch of single-shot or sequential experiments.
    Simulate(SimulateArgs),
    /// Regenerate the datasets behind the trial-count and error-probability figures.
    Reproduce(ReproduceArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ReceiverArg {
    Ci,
    QiHh,
    QiPc,
    QiIdlerHet,
}

impl From<ReceiverArg> for ReceiverKind {
    fn from(r: ReceiverArg) -> Self {
        match r {
            ReceiverArg::Ci => ReceiverKind::CiHomodyne,
            ReceiverArg::QiHh => ReceiverKind::QiHeteroHomodyne,
            ReceiverArg::QiPc => ReceiverKind::QiPhaseConjugate,
            ReceiverArg::QiIdlerHet => ReceiverKind::QiIdlerHeterodyne,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum FidelityArg {
    Asymptotic,
    PaperExact,
    ModeLevel,
}

impl From<FidelityArg> for Fidelity {
    fn from(f: FidelityArg) -> Self {
        match f {
            FidelityArg::Asymptotic => Fidelity::Asymptotic,
            FidelityArg::PaperExact => Fidelity::PaperExact,
            FidelityArg::ModeLevel => Fidelity::ModeLevel,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ModeArg {
    Lrt,
    Sprt,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ThresholdArg {
    Fixed,
    Adaptive,
}

#[derive(Debug, Args)]
pub struct TheoryArgs {
    /// Scenario file; defaults to the built-in reference scenario.
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "qi-hh")]
    pub receiver: ReceiverArg,
    /// Target error probabilities; repeat for several.
    #[arg(long = "alpha", default_values_t = [1e-4])]
    pub alphas: Vec<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: OutputFormat,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "qi-hh")]
    pub receiver: ReceiverArg,
    #[arg(long, value_enum, default_value = "asymptotic")]
    pub fidelity: FidelityArg,
    #[arg(long, value_enum, default_value = "sprt")]
    pub mode: ModeArg,
    #[arg(long, default_value_t = 1e-4)]
    pub alpha: f64,
    /// Defaults to alpha.
    #[arg(long)]
    pub beta: Option<f64>,
    /// Trial cap; defaults to max(1000, 100 x predicted average).
    #[arg(long)]
    pub max_trials: Option<u64>,
    /// Single-shot threshold (adaptive requires mode-level fidelity).
    #[arg(long, value_enum, default_value = "fixed")]
    pub threshold: ThresholdArg,
    #[arg(long, default_value_t = DEFAULT_EXPERIMENTS)]
    pub experiments: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: OutputFormat,
}

#[derive(Debug, Args)]
pub struct ReproduceArgs {
    #[arg(value_enum)]
    pub figure: Figure,
    #[arg(long, default_value_t = DEFAULT_EXPERIMENTS)]
    pub experiments: u64,
    /// Use 1e6 experiments per hypothesis.
    #[arg(long, conflicts_with = "experiments")]
    pub full: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub threads: Option<usize>,
    /// Fidelity for the quantum series.
    #[arg(long, value_enum, default_value = "asymptotic")]
    pub fidelity: FidelityArg,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

fn threads(requested: Option<usize>) -> Result<usize> {
    match requested {
        Some(0) => bail!("--threads must be at least 1"),
        Some(n) => Ok(n),
        None => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

fn scenario(path: &Option<PathBuf>) -> Result<ScenarioParams> {
    Ok(match path {
        Some(p) => load_scenario(p)?,
        None => ScenarioParams::reference(),
    })
}

pub fn resolve_simulate(args: &SimulateArgs) -> Result<BatchConfig> {
    let scenario = scenario(&args.scenario)?;
    let receiver: ReceiverKind = args.receiver.into();
    let mode = match args.mode {
        ModeArg::Lrt => DetectionMode::Lrt,
        ModeArg::Sprt => DetectionMode::Sprt,
    };
    let sprt = match mode {
        DetectionMode::Sprt => Some(commands::sprt_config(
            receiver,
            &scenario,
            args.alpha,
            args.beta.unwrap_or(args.alpha),
            args.max_trials,
        )?),
        DetectionMode::Lrt => None,
    };
    let batch = BatchConfig {
        scenario,
        receiver,
        fidelity: args.fidelity.into(),
        mode,
        sprt,
        lrt_threshold: match args.threshold {
            ThresholdArg::Fixed => ThresholdMode::Fixed,
            ThresholdArg::Adaptive => ThresholdMode::Adaptive,
        },
        experiments_per_hypothesis: args.experiments,
        master_seed: args.seed,
        worker_count: threads(args.threads)?,
    };
    batch.validate()?;
    Ok(batch)
}

/// Writes a line to stdout; a closed pipe (`qillum theory | head`) is not an error.
fn emit(text: &str) -> Result<()> {
    match writeln!(io::stdout().lock(), "{text}") {
        Err(e) if e.kind() == io::ErrorKind::BrokenPipe => Ok(()),
        r => Ok(r?),
    }
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Theory(args) => {
            let start = std::time::Instant::now();
            let params = scenario(&args.scenario)?;
            let receiver = args.receiver.into();
            let out = commands::theory(&params, receiver, &args.alphas)?;
            emit(&serde_json::to_string_pretty(&out)?)?;
            if let Some(path) = &args.out {
                let mut dir = OutputDir::create(path)?;
                match args.format {
                    OutputFormat::Json => dir.write_json("theory.json", &out)?,
                    OutputFormat::Csv => dir.write_table("theory.csv", &commands::theory_table(&out))?,
                };
                dir.finish(
                    ResolvedConfig::Theory {
                        scenario: params,
                        receiver,
                        alphas: args.alphas.clone(),
                        format: args.format,
                    },
                    None,
                    start.elapsed().as_secs_f64(),
                )?;
            }
        }
        Command::Simulate(args) => {
            let batch = resolve_simulate(&args)?;
            let (summary, _) = commands::simulate(&batch, args.format, args.out.as_ref())?;
            if args.out.is_none() {
                emit(&serde_json::to_string_pretty(&summary)?)?;
            } else {
                emit(&format!(
                    "pr_e_hat = {:e}, mean trials = ({}, {})",
                    summary.pr_e_hat, summary.mean_trials_h0, summary.mean_trials_h1
                ))?;
            }
        }
        Command::Reproduce(args) => {
            let opts = ReproduceOptions {
                figure: args.figure,
                experiments_per_hypothesis: if args.full { FULL_EXPERIMENTS } else { args.experiments },
                master_seed: args.seed,
                worker_count: threads(args.threads)?,
                qi_fidelity: args.fidelity.into(),
                out_dir: args.out.clone(),
            };
            let result = commands::reproduce(&opts)?;
            for (name, s) in &result.summaries {
                emit(&format!(
                    "{name}: mean trials {:.2}, pr_e_hat {:e}, errors {}+{}",
                    s.mean_trials(),
                    s.pr_e_hat,
                    s.errors_h0,
                    s.errors_h1
                ))?;
            }
            for path in &result.manifest.output_paths {
                emit(&format!("wrote {path}"))?;
            }
        }
    }
    Ok(())
}
