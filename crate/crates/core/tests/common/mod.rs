#![allow(dead_code)]

use commfolio_core::planarity::is_planar;
use commfolio_core::pmfg::PlanarGraph;
use commfolio_core::returns::CorrelationMatrix;
use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::Rng;

pub fn names(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("X{i:03}")).collect()
}

/// Correlation matrix of `k` random factor loadings per asset plus noise.
pub fn random_correlation<R: Rng>(n: usize, rng: &mut R) -> CorrelationMatrix {
    let k = 3;
    let loadings: DMatrix<f64> = DMatrix::from_fn(n, k, |_, _| rng.random_range(-1.0..1.0));
    let mut cov = &loadings * loadings.transpose();
    for i in 0..n {
        cov[(i, i)] += rng.random_range(0.05..1.0);
    }
    let d: Vec<f64> = (0..n).map(|i| cov[(i, i)].sqrt()).collect();
    let values =
        DMatrix::from_fn(n, n, |i, j| if i == j { 1.0 } else { (cov[(i, j)] / (d[i] * d[j])).clamp(-1.0, 1.0) });
    let values = DMatrix::from_fn(n, n, |i, j| if i <= j { values[(i, j)] } else { values[(j, i)] });
    CorrelationMatrix::from_values(names(n), values).unwrap()
}

/// Random connected planar graph: a random spanning tree plus random extra
/// edges that keep it planar, with weights in `[-0.3, 1)`.
pub fn random_planar_graph<R: Rng>(n: usize, extra_tries: usize, rng: &mut R) -> PlanarGraph {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut edges: Vec<(usize, usize)> = Vec::new();
    for i in 1..n {
        let parent = order[rng.random_range(0..i)];
        edges.push((parent, order[i]));
    }
    for _ in 0..extra_tries {
        let (u, v) = (rng.random_range(0..n), rng.random_range(0..n));
        if u == v || edges.iter().any(|&(a, b)| (a, b) == (u, v) || (a, b) == (v, u)) {
            continue;
        }
        edges.push((u, v));
        if !is_planar(n, &edges) {
            edges.pop();
        }
    }
    let weighted: Vec<_> = edges.iter().map(|&(u, v)| (u, v, rng.random_range(-0.3..1.0))).collect();
    PlanarGraph::from_edges(names(n), &weighted).unwrap()
}

/// Every set partition of `0..n` as a restricted growth string.
pub fn set_partitions(n: usize) -> Vec<Vec<usize>> {
    fn grow(prefix: &mut Vec<usize>, max: usize, n: usize, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == n {
            out.push(prefix.clone());
            return;
        }
        for label in 0..=max + 1 {
            prefix.push(label);
            grow(prefix, max.max(label), n, out);
            prefix.pop();
        }
    }
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    let mut prefix = vec![0];
    grow(&mut prefix, 0, n, &mut out);
    out
}
