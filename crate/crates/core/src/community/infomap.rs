//! Greedy map-equation minimization.
//!
//! One trial alternates two phases until the codelength stops improving:
//!
//! * coarse: local moves of (super-)nodes into neighboring or empty modules,
//!   then aggregation of every module into a super-node, repeated until no
//!   super-node moves;
//! * fine: single leaf nodes are moved again starting from the coarse
//!   solution, which repairs nodes that were locked into the wrong module by
//!   an early aggregation.
//!
//! The best partition over all trials is compared against the one-module
//! solution, which local moves from singletons cannot always reach.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::mapeq::{plogp, Flow, FlowModel};
use super::Partition;
use crate::error::Result;
use crate::pmfg::PlanarGraph;
use crate::seed;

const MIN_IMPROVEMENT: f64 = 1e-10;
const MAX_SWEEPS: usize = 200;
const MAX_ROUNDS: usize = 50;

/// Search parameters for [`detect_communities`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectOptions {
    pub trials: usize,
    pub seed: u64,
    pub flow_model: FlowModel,
}

impl Default for DetectOptions {
    fn default() -> Self {
        Self { trials: 20, seed: 0, flow_model: FlowModel::RequireConnected }
    }
}

/// Network of (super-)nodes with symmetric link flows.
struct Network {
    flow: Vec<f64>,
    exit: Vec<f64>,
    links: Vec<Vec<(usize, f64)>>,
}

impl Network {
    fn from_flow(flow: &Flow) -> Self {
        Self {
            flow: flow.node.clone(),
            exit: flow.links.iter().map(|l| l.iter().map(|&(_, f)| f).sum()).collect(),
            links: flow.links.clone(),
        }
    }

    /// Collapses every module of `assignment` (contiguous ids) into one node.
    fn aggregate(leaf: &Flow, assignment: &[usize], n_modules: usize) -> Self {
        let mut flow = vec![0.0; n_modules];
        let mut acc: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n_modules];
        // Position of each target module in the current row; reset per row.
        let mut slot = vec![usize::MAX; n_modules];
        let mut members: Vec<Vec<usize>> = vec![Vec::new(); n_modules];
        for (a, &m) in assignment.iter().enumerate() {
            members[m].push(a);
            flow[m] += leaf.node[a];
        }
        for (m, nodes) in members.iter().enumerate() {
            let mut touched = Vec::new();
            for &a in nodes {
                for &(b, f) in &leaf.links[a] {
                    let mb = assignment[b];
                    if mb == m {
                        continue;
                    }
                    if slot[mb] == usize::MAX {
                        slot[mb] = acc[m].len();
                        acc[m].push((mb, 0.0));
                        touched.push(mb);
                    }
                    acc[m][slot[mb]].1 += f;
                }
            }
            for t in touched {
                slot[t] = usize::MAX;
            }
        }
        let exit = acc.iter().map(|l| l.iter().map(|&(_, f)| f).sum()).collect();
        Self { flow, exit, links: acc }
    }

    fn n(&self) -> usize {
        self.flow.len()
    }
}

/// Module bookkeeping for local moves on one network.
struct Modules {
    of: Vec<usize>,
    flow: Vec<f64>,
    exit: Vec<f64>,
    size: Vec<usize>,
    empty: Vec<usize>,
    total_exit: f64,
    exit_log_exit: f64,
    flow_log_flow: f64,
}

impl Modules {
    fn new(net: &Network, of: Vec<usize>) -> Self {
        let n = net.n();
        let mut flow = vec![0.0; n];
        let mut exit = vec![0.0; n];
        let mut size = vec![0; n];
        for a in 0..n {
            let m = of[a];
            flow[m] += net.flow[a];
            size[m] += 1;
            for &(b, f) in &net.links[a] {
                if of[b] != m {
                    exit[m] += f;
                }
            }
        }
        let empty = (0..n).rev().filter(|&m| size[m] == 0).collect();
        let mut s = Self { of, flow, exit, size, empty, total_exit: 0.0, exit_log_exit: 0.0, flow_log_flow: 0.0 };
        s.recompute_sums();
        s
    }

    fn recompute_sums(&mut self) {
        self.total_exit = self.exit.iter().sum();
        self.exit_log_exit = self.exit.iter().map(|&q| plogp(q)).sum();
        self.flow_log_flow = self.exit.iter().zip(&self.flow).map(|(&q, &p)| plogp(q + p)).sum();
    }

    /// Codelength without the constant node-entropy term.
    fn module_codelength(&self) -> f64 {
        plogp(self.total_exit) - 2.0 * self.exit_log_exit + self.flow_log_flow
    }

    /// Change in codelength if a node with `flow`/`exit` leaves `old` (sharing
    /// `to_old` link flow with it) and joins `new` (sharing `to_new`).
    #[allow(clippy::too_many_arguments)]
    fn delta(&self, flow: f64, exit: f64, old: usize, to_old: f64, new: usize, to_new: f64) -> f64 {
        let old_exit = self.exit[old] - exit + 2.0 * to_old;
        let new_exit = self.exit[new] + exit - 2.0 * to_new;
        let old_flow = self.flow[old] - flow;
        let new_flow = self.flow[new] + flow;
        let total_exit = self.total_exit - self.exit[old] - self.exit[new] + old_exit + new_exit;
        let exit_log_exit =
            self.exit_log_exit - plogp(self.exit[old]) - plogp(self.exit[new]) + plogp(old_exit) + plogp(new_exit);
        let flow_log_flow =
            self.flow_log_flow - plogp(self.exit[old] + self.flow[old]) - plogp(self.exit[new] + self.flow[new])
                + plogp(old_exit + old_flow)
                + plogp(new_exit + new_flow);
        plogp(total_exit) - 2.0 * exit_log_exit + flow_log_flow - self.module_codelength()
    }

    #[allow(clippy::too_many_arguments)]
    fn apply(&mut self, node: usize, flow: f64, exit: f64, old: usize, to_old: f64, new: usize, to_new: f64) {
        self.exit[old] += -exit + 2.0 * to_old;
        self.exit[new] += exit - 2.0 * to_new;
        self.flow[old] -= flow;
        self.flow[new] += flow;
        self.size[old] -= 1;
        self.size[new] += 1;
        if self.size[old] == 0 {
            self.exit[old] = 0.0;
            self.flow[old] = 0.0;
            self.empty.push(old);
        }
        if let Some(pos) = self.empty.iter().rposition(|&m| m == new) {
            self.empty.remove(pos);
        }
        self.of[node] = new;
        // Full recomputation keeps round-off from drifting over many moves.
        self.recompute_sums();
    }
}

/// Sweeps over nodes in random order, moving each to the module that lowers
/// the codelength most, until a sweep moves nothing. Returns whether any move happened.
fn move_nodes(net: &Network, modules: &mut Modules, rng: &mut ChaCha8Rng) -> bool {
    let n = net.n();
    let mut order: Vec<usize> = (0..n).collect();
    let mut link_to = vec![0.0; n];
    let mut touched: Vec<usize> = Vec::new();
    let mut moved_any = false;

    for _ in 0..MAX_SWEEPS {
        order.shuffle(rng);
        let mut moves = 0;
        for &a in &order {
            let old = modules.of[a];
            touched.clear();
            for &(b, f) in &net.links[a] {
                let mb = modules.of[b];
                if link_to[mb] == 0.0 && !touched.contains(&mb) {
                    touched.push(mb);
                }
                link_to[mb] += f;
            }
            let to_old = link_to[old];

            let mut best = (0.0, old, 0.0);
            for &m in &touched {
                if m == old {
                    continue;
                }
                let d = modules.delta(net.flow[a], net.exit[a], old, to_old, m, link_to[m]);
                if d < best.0 {
                    best = (d, m, link_to[m]);
                }
            }
            if modules.size[old] > 1 {
                if let Some(&m) = modules.empty.last() {
                    let d = modules.delta(net.flow[a], net.exit[a], old, to_old, m, 0.0);
                    if d < best.0 {
                        best = (d, m, 0.0);
                    }
                }
            }
            for &m in &touched {
                link_to[m] = 0.0;
            }

            let (d, new, to_new) = best;
            if new != old && d < -MIN_IMPROVEMENT {
                modules.apply(a, net.flow[a], net.exit[a], old, to_old, new, to_new);
                moves += 1;
            }
        }
        if moves == 0 {
            break;
        }
        moved_any = true;
    }
    moved_any
}

/// Renumbers labels to `0..k` in order of first appearance.
fn relabel(labels: &mut [usize]) -> usize {
    let mut map = vec![usize::MAX; labels.len().max(labels.iter().max().map_or(0, |m| m + 1))];
    let mut next = 0;
    for l in labels.iter_mut() {
        if map[*l] == usize::MAX {
            map[*l] = next;
            next += 1;
        }
        *l = map[*l];
    }
    next
}

fn run_trial(leaf: &Flow, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let n = leaf.n();
    let leaf_net = Network::from_flow(leaf);
    let mut assignment: Vec<usize> = (0..n).collect();
    let mut best = leaf.codelength(&assignment);

    for _ in 0..MAX_ROUNDS {
        // Coarse phase.
        let mut k = relabel(&mut assignment);
        loop {
            let net = Network::aggregate(leaf, &assignment, k);
            let mut modules = Modules::new(&net, (0..k).collect());
            if !move_nodes(&net, &mut modules, rng) {
                break;
            }
            for m in assignment.iter_mut() {
                *m = modules.of[*m];
            }
            k = relabel(&mut assignment);
        }

        // Fine phase on leaf nodes.
        let mut modules = Modules::new(&leaf_net, assignment.clone());
        move_nodes(&leaf_net, &mut modules, rng);
        let mut refined = modules.of;
        relabel(&mut refined);
        let refined_len = leaf.codelength(&refined);
        let coarse_len = leaf.codelength(&assignment);
        if refined_len < coarse_len - MIN_IMPROVEMENT {
            assignment = refined;
        }
        let current = leaf.codelength(&assignment);
        if current >= best - MIN_IMPROVEMENT {
            break;
        }
        best = current;
    }
    relabel(&mut assignment);
    assignment
}

/// Lowest-codelength partition of `g` over `trials` randomized restarts.
///
/// Deterministic for fixed `(trials, seed)`. The result carries both its
/// codelength and its modularity.
pub fn detect_communities(g: &PlanarGraph, trials: usize, seed: u64) -> Result<Partition> {
    detect_communities_with(g, DetectOptions { trials, seed, ..Default::default() })
}

pub(crate) fn detect_communities_with(g: &PlanarGraph, opts: DetectOptions) -> Result<Partition> {
    let n = g.n_nodes();
    let flow = Flow::from_graph(g, opts.flow_model)?;

    let mut best_labels = vec![0; n];
    let mut best_len = flow.codelength(&best_labels);
    for trial in 0..opts.trials.max(1) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed::derive(opts.seed, &[trial as u64]));
        let labels = run_trial(&flow, &mut rng);
        let len = flow.codelength(&labels);
        if len < best_len - MIN_IMPROVEMENT {
            best_len = len;
            best_labels = labels;
        }
    }

    let mut p = Partition::from_labels(&best_labels);
    p.window = g.window.map(|w| w.index);
    p.weight_shift = flow.shift;
    p.codelength = if n == 1 { 0.0 } else { best_len.max(0.0) };
    p.modularity = if g.edge_count() > 0 { super::modularity(g, &p)? } else { 0.0 };
    Ok(p)
}
