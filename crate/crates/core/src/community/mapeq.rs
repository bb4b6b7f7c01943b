//! Two-level map equation for undirected weighted graphs.
//!
//! Node visit rates are proportional to node strength and each edge carries
//! `w / 2W` flow in each direction. For modules with exit rates `q_i` and
//! total flow `p_i`,
//!
//! ```text
//! L = plogp(sum q_i) - 2 sum plogp(q_i) - sum_a plogp(p_a) + sum plogp(q_i + p_i)
//! ```
//!
//! which is the usual `q H(Q) + sum p_i H(P_i)` expanded so that moving one
//! node only touches the terms of two modules.

use crate::community::Partition;
use crate::error::{Error, Result};
use crate::pmfg::PlanarGraph;

/// How to treat graphs whose random walk is not irreducible.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum FlowModel {
    /// Disconnected graphs are an error.
    #[default]
    RequireConnected,
    /// Use strength-proportional visit rates on every component.
    AllowDisconnected,
}

pub(crate) fn plogp(p: f64) -> f64 {
    if p > 0.0 {
        p * p.log2()
    } else {
        0.0
    }
}

/// Stationary flow of the random walk on a graph.
#[derive(Debug, Clone)]
pub(crate) struct Flow {
    /// Visit rate of each node.
    pub node: Vec<f64>,
    /// Per node, `(neighbor, flow along the edge in one direction)`.
    pub links: Vec<Vec<(usize, f64)>>,
    pub shift: f64,
}

impl Flow {
    pub fn from_graph(g: &PlanarGraph, model: FlowModel) -> Result<Self> {
        let n = g.n_nodes();
        if n == 0 {
            return Err(Error::Usage("graph has no nodes".into()));
        }
        if model == FlowModel::RequireConnected && !g.is_connected() {
            return Err(Error::Disconnected);
        }
        let min_weight = g.edges().iter().map(|e| e.weight).fold(f64::INFINITY, f64::min);
        let shift = if min_weight.is_finite() { (-min_weight).max(0.0) } else { 0.0 };
        let total: f64 = g.edges().iter().map(|e| e.weight + shift).sum();

        if total <= 0.0 {
            // No usable edge weight at all: the walker never moves.
            let uniform = 1.0 / n as f64;
            return Ok(Self { node: vec![uniform; n], links: vec![Vec::new(); n], shift });
        }
        let links: Vec<Vec<(usize, f64)>> = (0..n)
            .map(|v| g.weighted_neighbors(v).map(|(w, wt)| (w, (wt + shift) / (2.0 * total))).collect())
            .collect();
        let node = links.iter().map(|l| l.iter().map(|&(_, f)| f).sum()).collect();
        Ok(Self { node, links, shift })
    }

    pub fn n(&self) -> usize {
        self.node.len()
    }

    pub fn node_entropy_term(&self) -> f64 {
        self.node.iter().map(|&p| plogp(p)).sum()
    }

    /// Codelength of `assignment` (any labels below `n`).
    pub fn codelength(&self, assignment: &[usize]) -> f64 {
        let k = assignment.iter().max().map_or(0, |m| m + 1);
        let mut flow = vec![0.0; k];
        let mut exit = vec![0.0; k];
        for (a, links) in self.links.iter().enumerate() {
            let ma = assignment[a];
            flow[ma] += self.node[a];
            for &(b, f) in links {
                if assignment[b] != ma {
                    exit[ma] += f;
                }
            }
        }
        let total_exit: f64 = exit.iter().sum();
        let exit_log_exit: f64 = exit.iter().map(|&q| plogp(q)).sum();
        let flow_log_flow: f64 = exit.iter().zip(&flow).map(|(&q, &p)| plogp(q + p)).sum();
        plogp(total_exit) - 2.0 * exit_log_exit - self.node_entropy_term() + flow_log_flow
    }
}

/// Codelength in bits of `p` on `g`; `g` must be connected.
pub fn map_equation(g: &PlanarGraph, p: &Partition) -> Result<f64> {
    map_equation_with(g, p, FlowModel::RequireConnected)
}

/// Codelength in bits of `p` on `g` under the given flow model.
pub fn map_equation_with(g: &PlanarGraph, p: &Partition, model: FlowModel) -> Result<f64> {
    p.check_cover(g)?;
    if g.n_nodes() == 1 {
        return Ok(0.0);
    }
    let flow = Flow::from_graph(g, model)?;
    Ok(flow.codelength(p.assignment()).max(0.0))
}
