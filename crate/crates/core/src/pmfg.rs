//! Planar maximally filtered graphs.
//!
//! Candidate edges are visited from the strongest to the weakest correlation
//! and kept whenever the graph stays planar, until the planar maximum of
//! `3(N-2)` edges is reached. Equal weights are ordered by the lexicographic
//! `(min ticker, max ticker)` pair so the result never depends on platform or
//! iteration order.

use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::planarity::is_planar_adjacency;
use crate::returns::{CorrelationMatrix, Window};

/// Undirected weighted edge with `u < v`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub weight: f64,
}

/// Simple undirected weighted graph that is kept planar.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanarGraph {
    tickers: Vec<String>,
    edges: Vec<Edge>,
    adjacency: Vec<Vec<usize>>,
    weights: Vec<Vec<f64>>,
    pub window: Option<Window>,
}

/// Outcome of a planarity-preserving insertion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Insertion {
    Accepted,
    Rejected,
}

impl PlanarGraph {
    /// Edgeless graph on the given nodes.
    pub fn new(tickers: Vec<String>) -> Self {
        let n = tickers.len();
        Self { tickers, edges: Vec::new(), adjacency: vec![Vec::new(); n], weights: vec![Vec::new(); n], window: None }
    }

    /// Edgeless graph with tickers `"0"`, `"1"`, ...
    pub fn with_nodes(n: usize) -> Self {
        Self::new((0..n).map(|i| i.to_string()).collect())
    }

    /// Builds a graph from an edge list, rejecting it if it is not planar.
    pub fn from_edges(tickers: Vec<String>, edges: &[(usize, usize, f64)]) -> Result<Self> {
        let mut g = Self::new(tickers);
        for &(u, v, w) in edges {
            g.check_new_edge(u, v)?;
            g.push_edge(u, v, w);
        }
        if !is_planar_adjacency(&g.adjacency) {
            return Err(Error::Usage("edge list is not planar".into()));
        }
        Ok(g)
    }

    pub fn n_nodes(&self) -> usize {
        self.tickers.len()
    }

    pub fn tickers(&self) -> &[String] {
        &self.tickers
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    /// Neighbors of `v` with the weight of the connecting edge.
    pub fn weighted_neighbors(&self, v: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.adjacency[v].iter().copied().zip(self.weights[v].iter().copied())
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.n_nodes() && self.adjacency[u].contains(&v)
    }

    pub fn is_connected(&self) -> bool {
        let n = self.n_nodes();
        if n == 0 {
            return true;
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = stack.pop() {
            for &w in &self.adjacency[v] {
                if !seen[w] {
                    seen[w] = true;
                    count += 1;
                    stack.push(w);
                }
            }
        }
        count == n
    }

    /// Re-runs the planarity test on the current edge set.
    pub fn verify_planar(&self) -> bool {
        is_planar_adjacency(&self.adjacency)
    }

    fn check_new_edge(&self, u: usize, v: usize) -> Result<()> {
        let n = self.n_nodes();
        if u >= n || v >= n {
            return Err(Error::Usage(format!("edge ({u}, {v}) out of range for {n} nodes")));
        }
        if u == v {
            return Err(Error::Usage(format!("self-loop on node {u}")));
        }
        if self.has_edge(u, v) {
            return Err(Error::Usage(format!("edge ({u}, {v}) already present")));
        }
        Ok(())
    }

    fn push_edge(&mut self, u: usize, v: usize, weight: f64) {
        self.edges.push(Edge { u: u.min(v), v: u.max(v), weight });
        self.adjacency[u].push(v);
        self.adjacency[v].push(u);
        self.weights[u].push(weight);
        self.weights[v].push(weight);
    }

    fn pop_edge(&mut self) {
        let e = self.edges.pop().expect("an edge to remove");
        for (a, b) in [(e.u, e.v), (e.v, e.u)] {
            let popped = self.adjacency[a].pop();
            debug_assert_eq!(popped, Some(b));
            self.weights[a].pop();
        }
    }

    /// Writes the edge list as CSV `u,v,weight` with tickers as node names.
    pub fn write_edge_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["u", "v", "weight"]).map_err(|e| Error::Data(e.to_string()))?;
        for e in &self.edges {
            w.write_record([&self.tickers[e.u], &self.tickers[e.v], &e.weight.to_string()])
                .map_err(|e| Error::Data(e.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "window": self.window,
            "nodes": self.tickers,
            "edges": self.edges.iter().map(|e| serde_json::json!({
                "u": self.tickers[e.u],
                "v": self.tickers[e.v],
                "weight": e.weight,
            })).collect::<Vec<_>>(),
        })
    }
}

/// Adds `(u, v)` with weight `w` only if the graph stays planar.
pub fn planarity_preserving_insert(g: &mut PlanarGraph, u: usize, v: usize, w: f64) -> Result<Insertion> {
    g.check_new_edge(u, v)?;
    g.push_edge(u, v, w);
    if is_planar_adjacency(&g.adjacency) {
        Ok(Insertion::Accepted)
    } else {
        g.pop_edge();
        Ok(Insertion::Rejected)
    }
}

/// All node pairs of `c`, strongest correlation first, ties by ticker pair.
pub fn ranked_pairs(c: &CorrelationMatrix) -> Vec<Edge> {
    let n = c.n();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| c.tickers[a].cmp(&c.tickers[b]));
    let mut rank = vec![0; n];
    for (r, &i) in order.iter().enumerate() {
        rank[i] = r;
    }
    let tie_key = |e: &Edge| (rank[e.u].min(rank[e.v]), rank[e.u].max(rank[e.v]));

    let mut pairs: Vec<Edge> =
        (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).map(|(u, v)| Edge { u, v, weight: c.get(u, v) }).collect();
    pairs.sort_by(|a, b| b.weight.total_cmp(&a.weight).then_with(|| tie_key(a).cmp(&tie_key(b))));
    pairs
}

/// Planar maximally filtered graph of `c`.
pub fn build_pmfg(c: &CorrelationMatrix) -> Result<PlanarGraph> {
    let n = c.n();
    if n < 3 {
        return Err(Error::Size(format!("a PMFG needs at least 3 nodes, got {n}")));
    }
    let target = 3 * (n - 2);
    let mut g = PlanarGraph::new(c.tickers.clone());
    g.window = Some(c.window);
    for e in ranked_pairs(c) {
        if g.edge_count() == target {
            break;
        }
        planarity_preserving_insert(&mut g, e.u, e.v, e.weight)?;
    }
    Ok(g)
}

/// Maximum-weight spanning tree of the complete graph on `c` (Kruskal).
///
/// Uses the same ranking as [`build_pmfg`], so its edges are always a subset
/// of the PMFG edges.
pub fn maximum_spanning_tree(c: &CorrelationMatrix) -> Result<Vec<Edge>> {
    let n = c.n();
    if n < 2 {
        return Err(Error::Size(format!("a spanning tree needs at least 2 nodes, got {n}")));
    }
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut tree = Vec::with_capacity(n - 1);
    for e in ranked_pairs(c) {
        let (ru, rv) = (find(&mut parent, e.u), find(&mut parent, e.v));
        if ru != rv {
            parent[ru] = rv;
            tree.push(e);
            if tree.len() == n - 1 {
                break;
            }
        }
    }
    Ok(tree)
}
