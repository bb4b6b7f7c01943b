//! Newman modularity on the unweighted adjacency of a graph.

use super::Partition;
use crate::error::{Error, Result};
use crate::pmfg::PlanarGraph;

/// `Q = sum_c [L_c / m - (d_c / 2m)^2]` where `L_c` counts edges inside `c`
/// and `d_c` sums the degrees of its members. Edge weights are ignored.
pub fn modularity(g: &PlanarGraph, p: &Partition) -> Result<f64> {
    p.check_cover(g)?;
    let m = g.edge_count();
    if m == 0 {
        return Err(Error::EmptyGraph);
    }
    let k = p.n_communities();
    let mut inside = vec![0usize; k];
    let mut degree = vec![0usize; k];
    for e in g.edges() {
        let (cu, cv) = (p.community_of(e.u), p.community_of(e.v));
        degree[cu] += 1;
        degree[cv] += 1;
        if cu == cv {
            inside[cu] += 1;
        }
    }
    let m = m as f64;
    Ok(inside.iter().zip(&degree).map(|(&l, &d)| l as f64 / m - (d as f64 / (2.0 * m)).powi(2)).sum())
}
