//! Unit-capacity max-flow and the vertex-connectivity routines built on it.

use std::collections::VecDeque;

use crate::error::{domain, Result};
use crate::graph::{is_connected, Graph, NodeSet};

const INF: u32 = u32::MAX / 2;

#[derive(Clone, Debug)]
struct Arc {
    to: usize,
    cap: u32,
}

/// Residual network solved with Dinic's algorithm.
#[derive(Clone, Debug)]
pub(crate) struct FlowNetwork {
    arcs: Vec<Arc>,
    original: Vec<u32>,
    out: Vec<Vec<usize>>,
    level: Vec<u32>,
    cursor: Vec<usize>,
}

impl FlowNetwork {
    pub(crate) fn new(nodes: usize) -> Self {
        Self {
            arcs: Vec::new(),
            original: Vec::new(),
            out: vec![Vec::new(); nodes],
            level: vec![0; nodes],
            cursor: vec![0; nodes],
        }
    }

    /// Adds `u -> v` with capacity `cap`; returns the arc index.
    pub(crate) fn add_arc(&mut self, u: usize, v: usize, cap: u32) -> usize {
        let id = self.arcs.len();
        self.arcs.push(Arc { to: v, cap });
        self.arcs.push(Arc { to: u, cap: 0 });
        self.original.push(cap);
        self.original.push(0);
        self.out[u].push(id);
        self.out[v].push(id + 1);
        id
    }

    pub(crate) fn reset(&mut self) {
        for (a, &c) in self.arcs.iter_mut().zip(&self.original) {
            a.cap = c;
        }
    }

    pub(crate) fn set_capacity(&mut self, arc: usize, cap: u32) {
        self.original[arc] = cap;
        self.arcs[arc].cap = cap;
    }

    pub(crate) fn flow_on(&self, arc: usize) -> u32 {
        self.original[arc] - self.arcs[arc].cap
    }

    pub(crate) fn arc_target(&self, arc: usize) -> usize {
        self.arcs[arc].to
    }

    fn bfs(&mut self, s: usize, t: usize) -> bool {
        self.level.iter_mut().for_each(|l| *l = u32::MAX);
        self.level[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &a in &self.out[u] {
                let v = self.arcs[a].to;
                if self.arcs[a].cap > 0 && self.level[v] == u32::MAX {
                    self.level[v] = self.level[u] + 1;
                    if v == t {
                        return true;
                    }
                    queue.push_back(v);
                }
            }
        }
        false
    }

    /// Finds one augmenting path in the level graph and pushes one unit.
    fn augment(&mut self, s: usize, t: usize) -> bool {
        let mut path: Vec<usize> = Vec::new();
        let mut u = s;
        loop {
            if u == t {
                for &a in &path {
                    self.arcs[a].cap -= 1;
                    self.arcs[a ^ 1].cap += 1;
                }
                return true;
            }
            let mut advanced = false;
            while self.cursor[u] < self.out[u].len() {
                let a = self.out[u][self.cursor[u]];
                let v = self.arcs[a].to;
                if self.arcs[a].cap > 0 && self.level[v] == self.level[u] + 1 {
                    path.push(a);
                    u = v;
                    advanced = true;
                    break;
                }
                self.cursor[u] += 1;
            }
            if !advanced {
                // Dead end: prune and retreat.
                self.level[u] = u32::MAX;
                match path.pop() {
                    Some(a) => {
                        u = self.arcs[a ^ 1].to;
                        self.cursor[u] += 1;
                    }
                    None => return false,
                }
            }
        }
    }

    /// Pushes up to `limit` units from `s` to `t`. All arc capacities used by
    /// callers are unit or `INF`, so each augmentation carries one unit.
    pub(crate) fn max_flow(&mut self, s: usize, t: usize, limit: usize) -> usize {
        let mut flow = 0;
        while flow < limit && self.bfs(s, t) {
            self.cursor.iter_mut().for_each(|c| *c = 0);
            while flow < limit && self.augment(s, t) {
                flow += 1;
            }
        }
        flow
    }

    /// Nodes reachable from `s` in the residual network.
    pub(crate) fn residual_reach(&self, s: usize) -> Vec<bool> {
        let mut seen = vec![false; self.out.len()];
        seen[s] = true;
        let mut stack = vec![s];
        while let Some(u) = stack.pop() {
            for &a in &self.out[u] {
                let v = self.arcs[a].to;
                if self.arcs[a].cap > 0 && !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen
    }
}

/// Node-split network of a graph: node `v` becomes `2v -> 2v+1` with unit
/// capacity, and each edge becomes two uncapacitated arcs between the halves.
struct SplitNetwork {
    net: FlowNetwork,
    inner_arc: Vec<usize>,
}

impl SplitNetwork {
    fn new(g: &Graph) -> Self {
        let n = g.n();
        let mut net = FlowNetwork::new(2 * n);
        let inner_arc = (0..n).map(|v| net.add_arc(2 * v, 2 * v + 1, 1)).collect();
        for (u, v) in g.edges() {
            net.add_arc(2 * u + 1, 2 * v, INF);
            net.add_arc(2 * v + 1, 2 * u, INF);
        }
        Self { net, inner_arc }
    }

    /// Local connectivity between non-adjacent `s` and `t`, capped at `limit`.
    /// Also returns a minimum separator when the flow is below the cap.
    fn local(&mut self, s: usize, t: usize, limit: usize) -> (usize, Option<Vec<usize>>) {
        self.net.set_capacity(self.inner_arc[s], INF);
        self.net.set_capacity(self.inner_arc[t], INF);
        self.net.reset();
        let flow = self.net.max_flow(2 * s + 1, 2 * t, limit);
        let cut = (flow < limit).then(|| {
            let reach = self.net.residual_reach(2 * s + 1);
            (0..self.inner_arc.len())
                .filter(|&v| v != s && v != t && reach[2 * v] && !reach[2 * v + 1])
                .collect()
        });
        self.net.set_capacity(self.inner_arc[s], 1);
        self.net.set_capacity(self.inner_arc[t], 1);
        (flow, cut)
    }
}

/// Maximum number of internally vertex-disjoint paths between two distinct
/// non-adjacent nodes.
pub fn local_vertex_connectivity(g: &Graph, s: usize, t: usize) -> Result<usize> {
    if s >= g.n() || t >= g.n() || s == t {
        return domain(format!("invalid pair ({s}, {t})"));
    }
    if g.has_edge(s, t) {
        return domain(format!("nodes {s} and {t} are adjacent"));
    }
    Ok(SplitNetwork::new(g).local(s, t, usize::MAX).0)
}

/// Vertex connectivity together with a minimum separator (`None` for
/// complete graphs, which have no separator).
pub fn min_vertex_cut(g: &Graph) -> Result<(usize, Option<NodeSet>)> {
    let n = g.n();
    if n < 2 {
        return domain(format!("vertex connectivity needs at least 2 nodes, got {n}"));
    }
    if !is_connected(g) {
        return Ok((0, Some(NodeSet::new(n))));
    }
    if g.is_complete() {
        return Ok((n - 1, None));
    }
    // A minimum-degree node v either lies outside some minimum cut, in which
    // case the cut separates v from a non-neighbor, or lies inside all of them,
    // in which case some pair of its neighbors is separated.
    let (deg, v) = g.min_degree().expect("n >= 2");
    let mut best = deg;
    let mut witness = g.neighbors(v).to_vec();
    let mut split = SplitNetwork::new(g);
    let mut adjacent = vec![false; n];
    for &u in g.neighbors(v) {
        adjacent[u] = true;
    }
    for w in (0..n).filter(|&w| w != v && !adjacent[w]) {
        if best == 0 {
            break;
        }
        if let (k, Some(cut)) = split.local(v, w, best) {
            best = k;
            witness = cut;
        }
    }
    let nbrs = g.neighbors(v);
    for (i, &x) in nbrs.iter().enumerate() {
        for &y in &nbrs[i + 1..] {
            if best == 0 {
                break;
            }
            if g.has_edge(x, y) {
                continue;
            }
            if let (k, Some(cut)) = split.local(x, y, best) {
                best = k;
                witness = cut;
            }
        }
    }
    Ok((best, Some(NodeSet::from_members(n, witness)?)))
}

/// Minimum number of nodes whose removal disconnects `g`; `n - 1` for
/// complete graphs and 0 for disconnected ones.
pub fn vertex_connectivity(g: &Graph) -> Result<usize> {
    min_vertex_cut(g).map(|(k, _)| k)
}
