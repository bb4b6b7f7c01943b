use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use commfolio_core::ingest::Layout;

use crate::config::{InputKind, Overrides, PipelineConfig};
use crate::error::Result;
use crate::pipeline::{run_all, run_analyze, run_correlate, run_portfolio, run_synthetic, StageReport};

#[derive(Debug, Parser)]
#[command(name = "commfolio", version, about = "Correlation-network communities and portfolio experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Generate a block-correlated return panel and its block labels.
    Synthetic,
    /// Compute one correlation matrix per rolling window.
    Correlate,
    /// Build filtered graphs and detect communities per window.
    Analyze,
    /// Run the frontier and expected-shortfall experiments.
    Portfolio,
    /// Run every stage in order.
    RunAll,
}

#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// Flat TOML configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output root directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Market data file.
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
    /// `prices` or `returns`.
    #[arg(long, global = true)]
    pub input_kind: Option<InputKind>,
    /// `wide` or `long`.
    #[arg(long, global = true)]
    pub layout: Option<Layout>,
    /// Window width in samples.
    #[arg(long, global = true)]
    pub window: Option<usize>,
    /// Window shift in samples.
    #[arg(long, global = true)]
    pub step: Option<usize>,
    /// Tail probability mass of expected shortfall.
    #[arg(long, global = true)]
    pub tail: Option<f64>,
    /// Portfolio size.
    #[arg(long, global = true)]
    pub m: Option<usize>,
    /// Comma-separated portfolio sizes for the ES-vs-size experiment.
    #[arg(long, global = true, value_delimiter = ',')]
    pub m_grid: Option<Vec<usize>>,
    /// Random selections per window and mode.
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    /// Community search restarts per window.
    #[arg(long, global = true)]
    pub trials: Option<usize>,
    /// Also write log-log co-occurrence and side-by-side frontier data.
    #[arg(long, global = true)]
    pub plot_data: bool,
}

impl Flags {
    pub fn overrides(&self) -> Overrides {
        Overrides {
            input: self.input.clone(),
            input_kind: self.input_kind,
            layout: self.layout,
            seed: self.seed,
            out: self.out.clone(),
            window: self.window,
            step: self.step,
            tail: self.tail,
            m: self.m,
            m_grid: self.m_grid.clone(),
            samples: self.samples,
            trials: self.trials,
            plot_data: self.plot_data,
        }
    }

    pub fn resolve(&self) -> Result<PipelineConfig> {
        PipelineConfig::resolve(self.config.as_deref(), &self.overrides())
    }
}

pub fn execute(command: Command, cfg: &PipelineConfig) -> Result<Vec<StageReport>> {
    match command {
        Command::Synthetic => run_synthetic(cfg).map(|r| vec![r]),
        Command::Correlate => run_correlate(cfg).map(|r| vec![r]),
        Command::Analyze => run_analyze(cfg).map(|r| vec![r]),
        Command::Portfolio => run_portfolio(cfg).map(|r| vec![r]),
        Command::RunAll => run_all(cfg),
    }
}
