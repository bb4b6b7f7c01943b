//! Per-window chain: correlation matrix, PMFG, community partition.

use rayon::prelude::*;

use crate::community::{detect_communities, Partition};
use crate::error::Result;
use crate::ingest::ReturnPanel;
use crate::pmfg::{build_pmfg, PlanarGraph};
use crate::returns::{rolling_correlations, CorrelationMatrix, Window, WindowSpec};
use crate::seed;

#[derive(Debug, Clone)]
pub struct WindowAnalysis {
    pub correlation: CorrelationMatrix,
    pub graph: PlanarGraph,
    pub partition: Partition,
}

impl WindowAnalysis {
    pub fn window(&self) -> Window {
        self.correlation.window
    }
}

/// Seed of the community search in window `index`.
pub fn window_seed(master: u64, index: usize) -> u64 {
    seed::derive(master, &[index as u64])
}

/// Builds the PMFG of `c` and partitions it.
pub fn analyze_correlation(c: CorrelationMatrix, trials: usize, master: u64) -> Result<WindowAnalysis> {
    let mut graph = build_pmfg(&c)?;
    graph.window = Some(c.window);
    let partition = detect_communities(&graph, trials, window_seed(master, c.window.index))?;
    Ok(WindowAnalysis { correlation: c, graph, partition })
}

/// Runs the chain on every scheduled window, in window order.
pub fn analyze_windows(
    returns: &ReturnPanel,
    spec: WindowSpec,
    trials: usize,
    master: u64,
) -> Result<Vec<WindowAnalysis>> {
    spec.check_nonsingular(returns.n_assets())?;
    rolling_correlations(returns, spec)?.into_par_iter().map(|c| analyze_correlation(c, trials, master)).collect()
}
