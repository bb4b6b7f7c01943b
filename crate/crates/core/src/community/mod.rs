//! Community structure of filtered correlation graphs.
//!
//! Partitions are found by minimizing the two-level map equation of a random
//! walk on the weighted graph ([`detect_communities`]) and scored with the
//! unweighted Newman modularity ([`modularity`]). [`stats`] summarizes a
//! sequence of per-window partitions.

mod infomap;
mod mapeq;
mod modularity;
pub mod stats;

pub use infomap::{detect_communities, DetectOptions};
pub use mapeq::{map_equation, map_equation_with, FlowModel};
pub use modularity::modularity;
pub use stats::{community_count_series, cooccurrence, nmi, CommunityCountSeries, CooccurrenceTable};

use std::io::Write;

use crate::error::{Error, Result};
use crate::pmfg::PlanarGraph;

/// Assignment of every node to exactly one community.
///
/// Community ids are contiguous, numbered in order of first appearance.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    pub window: Option<usize>,
    assignment: Vec<usize>,
    n_communities: usize,
    /// Map-equation codelength in bits; NaN until scored.
    pub codelength: f64,
    /// Modularity of the partition; NaN until scored.
    pub modularity: f64,
    /// Constant added to every edge weight to make random-walk rates non-negative.
    pub weight_shift: f64,
}

impl Partition {
    /// Relabels arbitrary labels into contiguous ids.
    pub fn from_labels(labels: &[usize]) -> Self {
        let mut map = std::collections::HashMap::new();
        let assignment: Vec<usize> = labels
            .iter()
            .map(|l| {
                let next = map.len();
                *map.entry(*l).or_insert(next)
            })
            .collect();
        Self {
            window: None,
            n_communities: map.len(),
            assignment,
            codelength: f64::NAN,
            modularity: f64::NAN,
            weight_shift: 0.0,
        }
    }

    /// All nodes in a single community.
    pub fn single(n: usize) -> Self {
        Self::from_labels(&vec![0; n])
    }

    /// Every node in its own community.
    pub fn singletons(n: usize) -> Self {
        Self::from_labels(&(0..n).collect::<Vec<_>>())
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn community_of(&self, node: usize) -> usize {
        self.assignment[node]
    }

    pub fn n_nodes(&self) -> usize {
        self.assignment.len()
    }

    pub fn n_communities(&self) -> usize {
        self.n_communities
    }

    /// Members of every community, ascending node order.
    pub fn communities(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.n_communities];
        for (node, &c) in self.assignment.iter().enumerate() {
            out[c].push(node);
        }
        out
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut out = vec![0; self.n_communities];
        for &c in &self.assignment {
            out[c] += 1;
        }
        out
    }

    /// Fills in codelength and modularity for `g`.
    pub fn score(mut self, g: &PlanarGraph) -> Result<Self> {
        self.check_cover(g)?;
        self.codelength = map_equation(g, &self)?;
        self.modularity = modularity(g, &self)?;
        Ok(self)
    }

    pub(crate) fn check_cover(&self, g: &PlanarGraph) -> Result<()> {
        if self.n_nodes() != g.n_nodes() {
            return Err(Error::Usage(format!(
                "partition covers {} nodes but the graph has {}",
                self.n_nodes(),
                g.n_nodes()
            )));
        }
        Ok(())
    }

    /// CSV `ticker,community`.
    pub fn write_csv<W: Write>(&self, tickers: &[String], out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["ticker", "community"]).map_err(|e| Error::Data(e.to_string()))?;
        for (t, c) in tickers.iter().zip(&self.assignment) {
            w.write_record([t.as_str(), &c.to_string()]).map_err(|e| Error::Data(e.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels_become_contiguous() {
        let p = Partition::from_labels(&[7, 7, 3, 9, 3]);
        assert_eq!(p.assignment(), [0, 0, 1, 2, 1]);
        assert_eq!(p.n_communities(), 3);
        assert_eq!(p.sizes(), vec![2, 2, 1]);
        assert_eq!(p.communities()[1], vec![2, 4]);
    }

    #[test]
    fn partition_csv() {
        let p = Partition::from_labels(&[1, 0]);
        let mut buf = Vec::new();
        p.write_csv(&["A".into(), "B".into()], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "ticker,community\nA,0\nB,1\n");
    }
}
