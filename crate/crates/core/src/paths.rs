//! Internally vertex-disjoint paths with at most two internal nodes.
//!
//! Between two non-adjacent node sets `A` and `B`, such a path is either
//! `a, x, b` or `a, u, w, b`. A node adjacent to both sides can always serve
//! alone, so a maximum family uses every such node as a one-internal path and
//! fills the rest with a maximum matching between the nodes that touch only
//! `A` and the nodes that touch only `B`. The matching is solved as a unit
//! max-flow on the layered network `source -> A-side -> B-side -> sink`.

use crate::error::{domain, Result};
use crate::flow::FlowNetwork;
use crate::graph::{Graph, NodeSet};

/// A path `start, internals..., end` with `start` in `A` and `end` in `B`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundedPath {
    pub start: usize,
    pub internals: Vec<usize>,
    pub end: usize,
}

/// Position a candidate internal node would occupy.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Role {
    /// The single internal node of a length-2 path.
    Single,
    /// First internal node of a length-3 path (adjacent to `A` only).
    First,
    /// Second internal node of a length-3 path (adjacent to `B` only).
    Second,
}

/// Maximum (up to `cap`) family of internally vertex-disjoint `A`-`B` paths
/// with one or two internal nodes, all outside `A`, `B` and `forbidden`.
pub fn max_disjoint_bounded_paths(
    g: &Graph,
    a: &NodeSet,
    b: &NodeSet,
    forbidden: &NodeSet,
    cap: usize,
) -> Result<Vec<BoundedPath>> {
    if a.is_empty() || b.is_empty() {
        return domain("endpoint sets must be nonempty");
    }
    if !a.is_disjoint(b) {
        return domain("endpoint sets intersect");
    }
    Ok(bounded_paths_by_role(g, a, b, cap, |_, v| !forbidden.contains(v)))
}

/// Core search. `eligible(role, v)` filters candidates per role; nodes in
/// `a` or `b` are never internal. Output order: one-internal paths by
/// ascending node, then two-internal paths by ascending first node.
pub(crate) fn bounded_paths_by_role(
    g: &Graph,
    a: &NodeSet,
    b: &NodeSet,
    cap: usize,
    eligible: impl Fn(Role, usize) -> bool,
) -> Vec<BoundedPath> {
    if cap == 0 {
        return Vec::new();
    }
    // Candidates touching A, discovered from A's side.
    let mut near_a = NodeSet::new(g.n());
    for s in a.iter() {
        for &x in g.neighbors(s) {
            if !a.contains(x) && !b.contains(x) {
                near_a.insert(x);
            }
        }
    }
    let touches_b = |x: usize| g.neighbors(x).iter().any(|&y| b.contains(y));
    let first_neighbor = |x: usize, side: &NodeSet| {
        *g.neighbors(x)
            .iter()
            .find(|&&y| side.contains(y))
            .expect("candidate touches side")
    };

    let mut out = Vec::new();
    let mut a_only = Vec::new();
    for x in near_a.iter() {
        if touches_b(x) {
            if out.len() < cap && eligible(Role::Single, x) {
                out.push(BoundedPath {
                    start: first_neighbor(x, a),
                    internals: vec![x],
                    end: first_neighbor(x, b),
                });
            }
        } else if eligible(Role::First, x) {
            a_only.push(x);
        }
    }
    let remaining = cap - out.len();
    if remaining == 0 || a_only.is_empty() {
        return out;
    }

    // Index B-only candidates reachable from the A-only ones.
    let mut slot = vec![usize::MAX; g.n()];
    let mut b_only = Vec::new();
    for &u in &a_only {
        for &w in g.neighbors(u) {
            if slot[w] == usize::MAX
                && !a.contains(w)
                && !b.contains(w)
                && !near_a.contains(w)
                && touches_b(w)
                && eligible(Role::Second, w)
            {
                slot[w] = b_only.len();
                b_only.push(w);
            }
        }
    }
    if b_only.is_empty() {
        return out;
    }
    let source = 0;
    let sink = 1;
    let left = |i: usize| 2 + i;
    let right = |j: usize| 2 + a_only.len() + j;
    let mut net = FlowNetwork::new(2 + a_only.len() + b_only.len());
    let mut middle = Vec::new();
    for (i, &u) in a_only.iter().enumerate() {
        net.add_arc(source, left(i), 1);
        for &w in g.neighbors(u) {
            if slot[w] != usize::MAX {
                middle.push((net.add_arc(left(i), right(slot[w]), 1), i));
            }
        }
    }
    for j in 0..b_only.len() {
        net.add_arc(right(j), sink, 1);
    }
    net.max_flow(source, sink, remaining);
    let mut longs: Vec<BoundedPath> = middle
        .into_iter()
        .filter(|&(arc, _)| net.flow_on(arc) == 1)
        .map(|(arc, i)| {
            let u = a_only[i];
            let w = b_only[net.arc_target(arc) - right(0)];
            BoundedPath {
                start: first_neighbor(u, a),
                internals: vec![u, w],
                end: first_neighbor(w, b),
            }
        })
        .collect();
    longs.sort_by_key(|p| p.internals[0]);
    out.extend(longs);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::path;

    fn set(n: usize, xs: &[usize]) -> NodeSet {
        NodeSet::from_members(n, xs.iter().copied()).unwrap()
    }

    #[test]
    fn single_internal() {
        let g = path(3);
        let paths = max_disjoint_bounded_paths(&g, &set(3, &[0]), &set(3, &[2]), &NodeSet::new(3), 5).unwrap();
        assert_eq!(
            paths,
            vec![BoundedPath {
                start: 0,
                internals: vec![1],
                end: 2
            }]
        );
    }

    #[test]
    fn two_internal() {
        let g = path(4);
        let paths = max_disjoint_bounded_paths(&g, &set(4, &[0]), &set(4, &[3]), &NodeSet::new(4), 5).unwrap();
        assert_eq!(paths.len(), 1);
        assert_eq!(paths[0].internals, vec![1, 2]);
        // Forbidding an internal kills it; a longer path is never used.
        let paths = max_disjoint_bounded_paths(&g, &set(4, &[0]), &set(4, &[3]), &set(4, &[2]), 5).unwrap();
        assert!(paths.is_empty());
        assert!(max_disjoint_bounded_paths(&path(5), &set(5, &[0]), &set(5, &[4]), &NodeSet::new(5), 5)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn disjoint_components_yield_nothing() {
        let g = Graph::from_edges(6, [(0, 1), (1, 2), (3, 4), (4, 5)]).unwrap();
        let paths = max_disjoint_bounded_paths(&g, &set(6, &[0]), &set(6, &[5]), &NodeSet::new(6), 3).unwrap();
        assert!(paths.is_empty());
    }

    #[test]
    fn cap_and_errors() {
        // K_{2,4} style: a, b joined through four middle nodes.
        let g = Graph::from_edges(6, (2..6).flat_map(|x| [(0, x), (1, x)])).unwrap();
        let a = set(6, &[0]);
        let b = set(6, &[1]);
        let none = NodeSet::new(6);
        assert_eq!(max_disjoint_bounded_paths(&g, &a, &b, &none, 10).unwrap().len(), 4);
        assert_eq!(max_disjoint_bounded_paths(&g, &a, &b, &none, 2).unwrap().len(), 2);
        assert!(max_disjoint_bounded_paths(&g, &a, &a, &none, 2).is_err());
        assert!(max_disjoint_bounded_paths(&g, &NodeSet::new(6), &b, &none, 2).is_err());
    }
}
