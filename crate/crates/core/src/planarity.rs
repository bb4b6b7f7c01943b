//! Left-right planarity test.
//!
//! A DFS orients the graph and computes low points; a second DFS processes
//! back edges in nesting order while maintaining a stack of conflict pairs of
//! return-edge intervals that must lie on opposite sides. The graph is planar
//! iff no interval ever has to be on both sides at once. Runs in linear time.

use std::collections::HashMap;

type EdgeId = usize;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
struct Interval {
    low: Option<EdgeId>,
    high: Option<EdgeId>,
}

impl Interval {
    fn single(e: EdgeId) -> Self {
        Self { low: Some(e), high: Some(e) }
    }

    fn is_empty(&self) -> bool {
        self.low.is_none() && self.high.is_none()
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct ConflictPair {
    left: Interval,
    right: Interval,
}

impl ConflictPair {
    fn swap(&mut self) {
        std::mem::swap(&mut self.left, &mut self.right);
    }

    fn is_empty(&self) -> bool {
        self.left.is_empty() && self.right.is_empty()
    }
}

struct LrState<'a> {
    adjacency: &'a [Vec<usize>],
    height: Vec<Option<usize>>,
    parent_edge: Vec<Option<EdgeId>>,
    /// Oriented edges `(source, target)`.
    edges: Vec<(usize, usize)>,
    oriented: HashMap<(usize, usize), EdgeId>,
    out_edges: Vec<Vec<EdgeId>>,
    lowpt: Vec<usize>,
    lowpt2: Vec<usize>,
    nesting_depth: Vec<usize>,
    lowpt_edge: Vec<EdgeId>,
    reference: Vec<Option<EdgeId>>,
    stack_bottom: Vec<usize>,
    stack: Vec<ConflictPair>,
}

impl<'a> LrState<'a> {
    fn new(adjacency: &'a [Vec<usize>], n_edges: usize) -> Self {
        let n = adjacency.len();
        Self {
            adjacency,
            height: vec![None; n],
            parent_edge: vec![None; n],
            edges: Vec::with_capacity(n_edges),
            oriented: HashMap::with_capacity(n_edges),
            out_edges: vec![Vec::new(); n],
            lowpt: Vec::with_capacity(n_edges),
            lowpt2: Vec::with_capacity(n_edges),
            nesting_depth: Vec::with_capacity(n_edges),
            lowpt_edge: Vec::new(),
            reference: Vec::new(),
            stack_bottom: Vec::new(),
            stack: Vec::new(),
        }
    }

    fn height(&self, v: usize) -> usize {
        self.height[v].expect("visited vertex")
    }

    fn orient(&mut self, v: usize) {
        let parent = self.parent_edge[v];
        let hv = self.height(v);
        for idx in 0..self.adjacency[v].len() {
            let w = self.adjacency[v][idx];
            let key = (v.min(w), v.max(w));
            if self.oriented.contains_key(&key) {
                continue;
            }
            let vw = self.edges.len();
            self.edges.push((v, w));
            self.oriented.insert(key, vw);
            self.out_edges[v].push(vw);
            self.lowpt.push(hv);
            self.lowpt2.push(hv);
            self.nesting_depth.push(0);

            match self.height[w] {
                None => {
                    self.parent_edge[w] = Some(vw);
                    self.height[w] = Some(hv + 1);
                    self.orient(w);
                }
                Some(hw) => self.lowpt[vw] = hw,
            }

            self.nesting_depth[vw] = 2 * self.lowpt[vw] + usize::from(self.lowpt2[vw] < hv);

            if let Some(e) = parent {
                if self.lowpt[vw] < self.lowpt[e] {
                    self.lowpt2[e] = self.lowpt[e].min(self.lowpt2[vw]);
                    self.lowpt[e] = self.lowpt[vw];
                } else if self.lowpt[vw] > self.lowpt[e] {
                    self.lowpt2[e] = self.lowpt2[e].min(self.lowpt[vw]);
                } else {
                    self.lowpt2[e] = self.lowpt2[e].min(self.lowpt2[vw]);
                }
            }
        }
    }

    fn conflicting(&self, interval: &Interval, edge: EdgeId) -> bool {
        match interval.high {
            Some(h) => self.lowpt[h] > self.lowpt[edge],
            None => false,
        }
    }

    fn lowest(&self, pair: &ConflictPair) -> usize {
        match (pair.left.low, pair.right.low) {
            (Some(l), Some(r)) => self.lowpt[l].min(self.lowpt[r]),
            (Some(l), None) => self.lowpt[l],
            (None, Some(r)) => self.lowpt[r],
            (None, None) => unreachable!("empty conflict pair on the stack"),
        }
    }

    fn set_ref(&mut self, at: Option<EdgeId>, to: Option<EdgeId>) {
        if let Some(e) = at {
            self.reference[e] = to;
        }
    }

    fn test(&mut self, v: usize) -> bool {
        let parent = self.parent_edge[v];
        let hv = self.height(v);
        let outs = self.out_edges[v].clone();
        for (idx, &ei) in outs.iter().enumerate() {
            self.stack_bottom[ei] = self.stack.len();
            let w = self.edges[ei].1;
            if self.parent_edge[w] == Some(ei) {
                if !self.test(w) {
                    return false;
                }
            } else {
                self.lowpt_edge[ei] = ei;
                self.stack.push(ConflictPair { left: Interval::default(), right: Interval::single(ei) });
            }

            if self.lowpt[ei] < hv {
                let e = parent.expect("a return edge below the root implies a parent edge");
                if idx == 0 {
                    self.lowpt_edge[e] = self.lowpt_edge[ei];
                } else if !self.add_constraints(ei, e) {
                    return false;
                }
            }
        }
        if let Some(e) = parent {
            self.remove_back_edges(e);
        }
        true
    }

    fn add_constraints(&mut self, ei: EdgeId, e: EdgeId) -> bool {
        let mut merged = ConflictPair::default();

        // Return edges of ei all go to the right side.
        loop {
            let mut q = self.stack.pop().expect("return edges of ei are on the stack");
            if !q.left.is_empty() {
                q.swap();
            }
            if !q.left.is_empty() {
                return false;
            }
            let q_low = q.right.low.expect("non-empty right interval");
            if self.lowpt[q_low] > self.lowpt[e] {
                if merged.right.is_empty() {
                    merged.right = q.right;
                } else {
                    self.set_ref(merged.right.low, q.right.high);
                }
                merged.right.low = q.right.low;
            } else {
                self.reference[q_low] = Some(self.lowpt_edge[e]);
            }
            if self.stack.len() == self.stack_bottom[ei] {
                break;
            }
        }

        // Earlier siblings' return edges that conflict with ei go to the left.
        while let Some(top) = self.stack.last().copied() {
            if !(self.conflicting(&top.left, ei) || self.conflicting(&top.right, ei)) {
                break;
            }
            let mut q = self.stack.pop().expect("checked above");
            if self.conflicting(&q.right, ei) {
                q.swap();
            }
            if self.conflicting(&q.right, ei) {
                return false;
            }
            self.set_ref(merged.right.low, q.right.high);
            if q.right.low.is_some() {
                merged.right.low = q.right.low;
            }
            if merged.left.is_empty() {
                merged.left = q.left;
            } else {
                self.set_ref(merged.left.low, q.left.high);
            }
            merged.left.low = q.left.low;
        }

        if !merged.is_empty() {
            self.stack.push(merged);
        }
        true
    }

    fn remove_back_edges(&mut self, e: EdgeId) {
        let u = self.edges[e].0;
        let hu = self.height(u);

        while let Some(top) = self.stack.last() {
            if self.lowest(top) != hu {
                break;
            }
            self.stack.pop();
        }

        if let Some(mut p) = self.stack.pop() {
            while let Some(h) = p.left.high {
                if self.edges[h].1 != u {
                    break;
                }
                p.left.high = self.reference[h];
            }
            if p.left.high.is_none() && p.left.low.is_some() {
                self.set_ref(p.left.low, p.right.low);
                p.left.low = None;
            }
            while let Some(h) = p.right.high {
                if self.edges[h].1 != u {
                    break;
                }
                p.right.high = self.reference[h];
            }
            if p.right.high.is_none() && p.right.low.is_some() {
                self.set_ref(p.right.low, p.left.low);
                p.right.low = None;
            }
            self.stack.push(p);
        }

        if self.lowpt[e] < hu {
            if let Some(top) = self.stack.last() {
                let (hl, hr) = (top.left.high, top.right.high);
                self.reference[e] = match (hl, hr) {
                    (Some(l), Some(r)) if self.lowpt[l] > self.lowpt[r] => hl,
                    (Some(_), None) => hl,
                    _ => hr,
                };
            }
        }
    }
}

/// Whether the simple undirected graph on `n` vertices with `edges` is planar.
///
/// Self-loops and repeated edges do not affect planarity and are ignored.
pub fn is_planar(n: usize, edges: &[(usize, usize)]) -> bool {
    let mut adjacency = vec![Vec::new(); n];
    let mut seen = std::collections::HashSet::with_capacity(edges.len());
    for &(u, v) in edges {
        assert!(u < n && v < n, "edge ({u}, {v}) out of range for {n} vertices");
        if u != v && seen.insert((u.min(v), u.max(v))) {
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
    }
    is_planar_adjacency(&adjacency)
}

/// Planarity of a simple graph given as adjacency lists.
pub(crate) fn is_planar_adjacency(adjacency: &[Vec<usize>]) -> bool {
    let n = adjacency.len();
    let m = adjacency.iter().map(Vec::len).sum::<usize>() / 2;
    if n > 2 && m > 3 * n - 6 {
        return false;
    }

    let mut state = LrState::new(adjacency, m);
    let mut roots = Vec::new();
    for v in 0..n {
        if state.height[v].is_none() {
            state.height[v] = Some(0);
            roots.push(v);
            state.orient(v);
        }
    }

    let n_oriented = state.edges.len();
    state.lowpt_edge = (0..n_oriented).collect();
    state.reference = vec![None; n_oriented];
    state.stack_bottom = vec![0; n_oriented];
    for v in 0..n {
        let depth = &state.nesting_depth;
        state.out_edges[v].sort_by_key(|&e| depth[e]);
    }

    roots.into_iter().all(|r| state.test(r))
}
