//! Portfolio construction on top of a community partition.
//!
//! Stocks are selected either one per community ([`Mode::Inter`]) or all from
//! a single community ([`Mode::Intra`]), then weighted by mean-variance
//! optimization ([`mv_optimize`], shorting allowed) or by expected-shortfall
//! minimization ([`minimize_es`], long-only).

mod experiment;
mod frontier;
mod meanvar;
mod select;
mod shortfall;

pub use experiment::{
    es_experiment_series, es_vs_size, frontier_experiment, write_es_series_csv, EsSeriesRow, EsSizeCell, EsVsSize,
    ExperimentInput, FrontierExperiment, FrontierRow, Infeasible, SizeCeilings,
};
pub use frontier::{efficient_frontier, frontier_aggregate, linear_bins, BinStat, FrontierPoint};
pub use meanvar::{mv_optimize, sample_moments, PortfolioWeights};
pub use select::{select_inter_community, select_intra_community, Mode, StockSelection};
pub use shortfall::{expected_shortfall, minimize_es, minimize_es_scenarios, EsResult};

use crate::error::{Error, Result};
use crate::ingest::ReturnPanel;
use crate::returns::Window;

/// Per-period returns of the selected assets inside `window`, one row per period.
pub(crate) fn window_scenarios(returns: &ReturnPanel, window: Window, assets: &[usize]) -> Result<Vec<Vec<f64>>> {
    if window.end > returns.len() || window.is_empty() {
        return Err(Error::Usage(format!(
            "window [{}, {}) invalid for series of length {}",
            window.start,
            window.end,
            returns.len()
        )));
    }
    if let Some(&bad) = assets.iter().find(|&&a| a >= returns.n_assets()) {
        return Err(Error::Usage(format!("asset index {bad} out of range")));
    }
    let series = returns.returns();
    Ok((window.start..window.end).map(|t| assets.iter().map(|&a| series[a][t]).collect()).collect())
}
