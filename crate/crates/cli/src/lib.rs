//! Staged command-line pipeline over `commfolio-core`.
//!
//! Stages run in the order synthetic, correlate, analyze, portfolio. Each
//! writes into its own directory under the configured output root and reuses
//! the previous run when its content-addressed key is unchanged.

pub mod args;
pub mod config;
pub mod error;
pub mod pipeline;
pub mod store;

pub use config::{InputKind, Overrides, PipelineConfig};
pub use error::{CliError, Result};
pub use pipeline::{run_all, run_analyze, run_correlate, run_portfolio, run_synthetic, Stage, StageReport};
