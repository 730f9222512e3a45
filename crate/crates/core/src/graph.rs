//! Undirected simple graphs over dense node ids and the set primitives built
//! on them: induced subgraphs, components, domination and the CDS test.

use std::collections::VecDeque;
use std::fmt;

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{domain, Error, Result};

/// A subset of the node ids `0..capacity`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct NodeSet {
    bits: FixedBitSet,
}

impl NodeSet {
    pub fn new(capacity: usize) -> Self {
        Self {
            bits: FixedBitSet::with_capacity(capacity),
        }
    }

    pub fn full(capacity: usize) -> Self {
        let mut bits = FixedBitSet::with_capacity(capacity);
        bits.insert_range(..);
        Self { bits }
    }

    /// Builds a set, rejecting members outside `0..capacity`.
    pub fn from_members(capacity: usize, members: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut set = Self::new(capacity);
        for v in members {
            if v >= capacity {
                return domain(format!("node {v} out of range for {capacity} nodes"));
            }
            set.bits.insert(v);
        }
        Ok(set)
    }

    pub fn capacity(&self) -> usize {
        self.bits.len()
    }

    pub fn len(&self) -> usize {
        self.bits.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_clear()
    }

    #[inline]
    pub fn contains(&self, v: usize) -> bool {
        self.bits.contains(v)
    }

    /// Inserts `v`; returns `true` if it was absent. Panics if `v >= capacity`.
    #[inline]
    pub fn insert(&mut self, v: usize) -> bool {
        !self.bits.put(v)
    }

    #[inline]
    pub fn remove(&mut self, v: usize) -> bool {
        let had = self.bits.contains(v);
        self.bits.set(v, false);
        had
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.ones()
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }

    pub fn first(&self) -> Option<usize> {
        self.bits.minimum()
    }

    pub fn union_with(&mut self, other: &NodeSet) {
        self.bits.union_with(&other.bits);
    }

    pub fn difference_with(&mut self, other: &NodeSet) {
        self.bits.difference_with(&other.bits);
    }

    pub fn is_disjoint(&self, other: &NodeSet) -> bool {
        self.bits.is_disjoint(&other.bits)
    }

    pub fn is_subset(&self, other: &NodeSet) -> bool {
        self.bits.is_subset(&other.bits)
    }

    pub fn intersection_count(&self, other: &NodeSet) -> usize {
        self.bits.intersection_count(&other.bits)
    }
}

impl fmt::Debug for NodeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl Serialize for NodeSet {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(self.iter())
    }
}

/// Deserializes as a member list; capacity is `max + 1` and must be widened
/// with [`NodeSet::with_capacity_of`] before use against a graph.
impl<'de> Deserialize<'de> for NodeSet {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let members = Vec::<usize>::deserialize(d)?;
        let cap = members.iter().max().map_or(0, |m| m + 1);
        Ok(NodeSet::from_members(cap, members).expect("capacity covers members"))
    }
}

impl NodeSet {
    /// Re-homes the set into a universe of `capacity` nodes.
    pub fn with_capacity_of(&self, capacity: usize) -> Result<NodeSet> {
        NodeSet::from_members(capacity, self.iter())
    }
}

/// Undirected simple graph with sorted adjacency lists.
#[derive(Clone, PartialEq, Eq)]
pub struct Graph {
    adj: Vec<Vec<usize>>,
    m: usize,
}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Graph(n={}, m={})", self.n(), self.m)
    }
}

impl Graph {
    pub fn empty(n: usize) -> Self {
        Self {
            adj: vec![Vec::new(); n],
            m: 0,
        }
    }

    /// Builds a graph from an edge list. Duplicate edges collapse; self-loops
    /// and out-of-range endpoints are rejected.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut adj = vec![Vec::new(); n];
        for (u, v) in edges {
            if u >= n || v >= n {
                return domain(format!("edge ({u}, {v}) out of range for {n} nodes"));
            }
            if u == v {
                return domain(format!("self-loop at node {u}"));
            }
            adj[u].push(v);
            adj[v].push(u);
        }
        let mut m = 0;
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
            m += list.len();
        }
        Ok(Self { adj, m: m / 2 })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.adj.len()
    }

    #[inline]
    pub fn m(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    #[inline]
    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        let (a, b) = if self.adj[u].len() <= self.adj[v].len() { (u, v) } else { (v, u) };
        self.adj[a].binary_search(&b).is_ok()
    }

    /// Edges with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(u, list)| list.iter().filter(move |&&v| u < v).map(move |&v| (u, v)))
    }

    pub fn min_degree(&self) -> Option<(usize, usize)> {
        (0..self.n()).map(|v| (self.degree(v), v)).min()
    }

    pub fn is_complete(&self) -> bool {
        let n = self.n();
        n > 0 && self.m == n * (n - 1) / 2
    }

    pub fn all_nodes(&self) -> NodeSet {
        NodeSet::full(self.n())
    }

    fn check_set(&self, s: &NodeSet) -> Result<()> {
        match s.iter().find(|&v| v >= self.n()) {
            Some(v) => domain(format!("node {v} out of range for {} nodes", self.n())),
            None => Ok(()),
        }
    }

    /// Returns `set` re-homed to this graph's node universe.
    pub fn node_set(&self, s: &NodeSet) -> Result<NodeSet> {
        self.check_set(s)?;
        s.with_capacity_of(self.n())
    }

    /// Parses the edge-list format: a `n m` header followed by `m` lines of
    /// `u v`. Text after `#` is ignored.
    pub fn parse_edge_list(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());
        let (hline, header) = lines.next().ok_or(Error::Parse {
            line: 0,
            msg: "missing `n m` header".into(),
        })?;
        let (n, m) = parse_pair(hline, header)?;
        let mut edges = Vec::with_capacity(m);
        for (line, l) in lines {
            let (u, v) = parse_pair(line, l)?;
            if u >= n || v >= n {
                return Err(Error::Parse {
                    line,
                    msg: format!("endpoint out of range for {n} nodes"),
                });
            }
            if u == v {
                return Err(Error::Parse {
                    line,
                    msg: format!("self-loop at node {u}"),
                });
            }
            edges.push((u, v));
        }
        if edges.len() != m {
            return Err(Error::Parse {
                line: hline,
                msg: format!("header declares {m} edges, found {}", edges.len()),
            });
        }
        Graph::from_edges(n, edges)
    }

    pub fn to_edge_list(&self) -> String {
        let mut out = format!("{} {}\n", self.n(), self.m());
        for (u, v) in self.edges() {
            out.push_str(&format!("{u} {v}\n"));
        }
        out
    }
}

fn parse_pair(line: usize, text: &str) -> Result<(usize, usize)> {
    let mut it = text.split_whitespace();
    let mut next = || -> Result<usize> {
        it.next()
            .ok_or_else(|| Error::Parse {
                line,
                msg: "expected two integers".into(),
            })?
            .parse()
            .map_err(|e| Error::Parse {
                line,
                msg: format!("{e}"),
            })
    };
    let a = next()?;
    let b = next()?;
    if it.next().is_some() {
        return Err(Error::Parse {
            line,
            msg: "trailing tokens".into(),
        });
    }
    Ok((a, b))
}

/// Subgraph induced by `s`, plus the map from new ids to original ids.
pub fn induced_subgraph(g: &Graph, s: &NodeSet) -> Result<(Graph, Vec<usize>)> {
    g.check_set(s)?;
    let mapping: Vec<usize> = s.iter().collect();
    let mut index = vec![usize::MAX; g.n()];
    for (i, &v) in mapping.iter().enumerate() {
        index[v] = i;
    }
    let mut adj = Vec::with_capacity(mapping.len());
    let mut m = 0;
    for &v in &mapping {
        // Original lists are sorted and `index` is monotone, so this stays sorted.
        let list: Vec<usize> = g
            .neighbors(v)
            .iter()
            .filter(|&&u| index[u] != usize::MAX)
            .map(|&u| index[u])
            .collect();
        m += list.len();
        adj.push(list);
    }
    Ok((Graph { adj, m: m / 2 }, mapping))
}

/// Connected components of `g[s]`, ordered by smallest member.
pub fn connected_components(g: &Graph, s: &NodeSet) -> Vec<NodeSet> {
    let mut seen = NodeSet::new(g.n());
    let mut out = Vec::new();
    let mut queue = VecDeque::new();
    for start in s.iter().filter(|&v| v < g.n()) {
        if !seen.insert(start) {
            continue;
        }
        let mut comp = NodeSet::new(g.n());
        comp.insert(start);
        queue.push_back(start);
        while let Some(v) = queue.pop_front() {
            for &u in g.neighbors(v) {
                if s.contains(u) && seen.insert(u) {
                    comp.insert(u);
                    queue.push_back(u);
                }
            }
        }
        out.push(comp);
    }
    out
}

/// Whether `g[s]` is connected. The empty set counts as disconnected.
pub fn is_connected_subset(g: &Graph, s: &NodeSet) -> bool {
    let Some(start) = s.first() else {
        return false;
    };
    let mut seen = NodeSet::new(g.n());
    seen.insert(start);
    let mut stack = vec![start];
    let mut count = 1;
    while let Some(v) = stack.pop() {
        for &u in g.neighbors(v) {
            if s.contains(u) && seen.insert(u) {
                count += 1;
                stack.push(u);
            }
        }
    }
    count == s.len()
}

pub fn is_connected(g: &Graph) -> bool {
    g.n() > 0 && is_connected_subset(g, &g.all_nodes())
}

/// Every node outside `s` has a neighbor in `s`.
pub fn is_dominating(g: &Graph, s: &NodeSet) -> bool {
    is_dominating_within(g, &g.all_nodes(), s)
}

/// Domination restricted to `g[universe]`: every node of `universe \ s` has a
/// neighbor in `s`.
pub fn is_dominating_within(g: &Graph, universe: &NodeSet, s: &NodeSet) -> bool {
    universe
        .iter()
        .all(|v| s.contains(v) || g.neighbors(v).iter().any(|&u| s.contains(u)))
}

pub fn is_cds(g: &Graph, s: &NodeSet) -> bool {
    is_cds_within(g, &g.all_nodes(), s)
}

/// CDS test in `g[universe]`; `s` must lie inside `universe`.
pub fn is_cds_within(g: &Graph, universe: &NodeSet, s: &NodeSet) -> bool {
    !s.is_empty()
        && s.iter().all(|v| v < g.n() && universe.contains(v))
        && is_dominating_within(g, universe, s)
        && is_connected_subset(g, s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{clique_chain, complete, cycle, path, petersen};

    fn set(n: usize, xs: &[usize]) -> NodeSet {
        NodeSet::from_members(n, xs.iter().copied()).unwrap()
    }

    #[test]
    fn induced_cycle_prefix_is_path() {
        let g = cycle(6);
        let (h, map) = induced_subgraph(&g, &set(6, &[0, 1, 2])).unwrap();
        assert_eq!(map, vec![0, 1, 2]);
        assert_eq!(h, path(3));
    }

    #[test]
    fn induced_on_everything_is_identity() {
        let g = petersen();
        let (h, map) = induced_subgraph(&g, &g.all_nodes()).unwrap();
        assert_eq!(h, g);
        assert_eq!(map, (0..10).collect::<Vec<_>>());
    }

    #[test]
    fn induced_petersen_outer_cycle() {
        // Outer 5-cycle 0-1-2-3-4 of the hand-listed Petersen adjacency.
        let g = petersen();
        let (h, _) = induced_subgraph(&g, &set(10, &[0, 1, 2, 3, 4])).unwrap();
        assert_eq!(h, cycle(5));
        let (h, _) = induced_subgraph(&g, &set(10, &[5, 6, 7, 8, 9])).unwrap();
        assert_eq!(h.m(), 5);
        assert!((0..5).all(|v| h.degree(v) == 2));
    }

    #[test]
    fn induced_rejects_foreign_members() {
        let g = cycle(4);
        let s = set(10, &[1, 7]);
        assert!(matches!(induced_subgraph(&g, &s), Err(Error::Domain(_))));
    }

    #[test]
    fn components_basic() {
        let g = cycle(4);
        let comps = connected_components(&g, &set(4, &[0, 2]));
        assert_eq!(comps, vec![set(4, &[0]), set(4, &[2])]);
        assert_eq!(connected_components(&g, &g.all_nodes()).len(), 1);
        assert!(connected_components(&g, &NodeSet::new(4)).is_empty());
    }

    #[test]
    fn clique_chain_end_cliques_are_separate() {
        let g = clique_chain(12, 3).unwrap();
        let comps = connected_components(&g, &set(12, &[0, 1, 2, 9, 10, 11]));
        assert_eq!(comps.len(), 2);
    }

    #[test]
    fn domination_examples() {
        assert!(is_dominating(&complete(5), &set(5, &[0])));
        assert!(is_dominating(&cycle(6), &set(6, &[0, 3])));
        assert!(!is_dominating(&cycle(6), &set(6, &[0])));
    }

    #[test]
    fn cds_examples() {
        assert!(is_cds(&cycle(4), &set(4, &[0, 1])));
        assert!(!is_cds(&cycle(6), &set(6, &[0, 3])));
        let k = complete(6);
        for mask in 1u32..64 {
            let s = NodeSet::from_members(6, (0..6).filter(|i| mask >> i & 1 == 1)).unwrap();
            assert!(is_cds(&k, &s));
        }
        assert!(!is_cds(&k, &NodeSet::new(6)));
    }

    #[test]
    fn cds_within_universe() {
        // Path 0-1-2-3-4 restricted to {0,1,2}: {1} dominates the universe.
        let g = path(5);
        let u = set(5, &[0, 1, 2]);
        assert!(is_cds_within(&g, &u, &set(5, &[1])));
        assert!(!is_cds(&g, &set(5, &[1])));
        assert!(!is_cds_within(&g, &u, &set(5, &[3])));
    }

    #[test]
    fn edge_list_round_trip() {
        let g = petersen();
        let text = g.to_edge_list();
        assert_eq!(Graph::parse_edge_list(&text).unwrap(), g);
        let commented = "# petersen\n".to_string() + &text.replace('\n', " # edge\n");
        assert_eq!(Graph::parse_edge_list(&commented).unwrap(), g);
    }

    #[test]
    fn edge_list_errors() {
        assert!(matches!(Graph::parse_edge_list(""), Err(Error::Parse { .. })));
        assert!(matches!(Graph::parse_edge_list("3 2\n0 1\n"), Err(Error::Parse { .. })));
        assert!(matches!(Graph::parse_edge_list("3 1\n0 3\n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(Graph::parse_edge_list("3 1\n1 1\n"), Err(Error::Parse { .. })));
        assert!(matches!(Graph::parse_edge_list("3 1\n0 x\n"), Err(Error::Parse { .. })));
    }

    #[test]
    fn from_edges_dedupes_and_rejects_loops() {
        let g = Graph::from_edges(3, [(0, 1), (1, 0), (1, 2)]).unwrap();
        assert_eq!(g.m(), 2);
        assert!(Graph::from_edges(3, [(2, 2)]).is_err());
    }
}
