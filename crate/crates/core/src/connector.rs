//! Connector paths: short or long bridges from one class component to the
//! rest of its class through next-layer nodes.
//!
//! A potential connector joins `comp` to `rest` with one or two internal
//! nodes outside the class. Long paths must be minimal: the first internal
//! node touches only `comp`, the second only `rest`. Short paths use the
//! type-1 copy of their internal node; long paths use type 2 then type 3.

use std::collections::HashSet;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeSet};
use crate::paths::{bounded_paths_by_role, BoundedPath, Role};
use crate::virtual_graph::VirtualNode;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ConnectorKind {
    Short,
    Long,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConnectorPath {
    pub component: usize,
    /// Layer of the internal copies.
    pub layer: usize,
    pub endpoint_in: usize,
    pub endpoint_out: usize,
    /// `(real, type)` pairs, ordered from the `comp` side.
    pub internals: Vec<(usize, u8)>,
    pub kind: ConnectorKind,
}

impl ConnectorPath {
    pub fn internal_nodes(&self) -> impl Iterator<Item = usize> + '_ {
        self.internals.iter().map(|&(r, _)| r)
    }

    fn from_bounded(p: &BoundedPath, component: usize, layer: usize) -> Self {
        match p.internals.as_slice() {
            [x] => Self {
                component,
                layer,
                endpoint_in: p.start,
                endpoint_out: p.end,
                internals: vec![(*x, 1)],
                kind: ConnectorKind::Short,
            },
            [u, w] => Self {
                component,
                layer,
                endpoint_in: p.start,
                endpoint_out: p.end,
                internals: vec![(*u, 2), (*w, 3)],
                kind: ConnectorKind::Long,
            },
            _ => unreachable!("bounded paths carry one or two internals"),
        }
    }
}

fn check_sides(g: &Graph, comp: &NodeSet, rest: &NodeSet) -> Result<()> {
    if comp.is_empty() || rest.is_empty() {
        return Err(Error::Contract("connector sides must be nonempty".into()));
    }
    if !comp.is_disjoint(rest) {
        return Err(Error::Contract("connector sides intersect".into()));
    }
    if comp.iter().any(|v| g.neighbors(v).iter().any(|&u| rest.contains(u))) {
        return Err(Error::Contract("component is adjacent to the rest of its class".into()));
    }
    Ok(())
}

/// Up to `cap` internally disjoint potential connectors from `comp` to
/// `rest`, all satisfying the minimality condition. Deterministic: short
/// connectors by ascending internal node, then long ones.
pub fn find_potential_connectors(
    g: &Graph,
    comp: &NodeSet,
    rest: &NodeSet,
    cap: usize,
) -> Result<Vec<ConnectorPath>> {
    check_sides(g, comp, rest)?;
    Ok(bounded_paths_by_role(g, comp, rest, cap, |_, _| true)
        .iter()
        .map(|p| ConnectorPath::from_bounded(p, 0, 0))
        .collect())
}

/// Like [`find_potential_connectors`] but only through copies accepted by
/// `live(real, ty)`, labelled with `component` and `layer`.
pub(crate) fn find_live_connectors(
    g: &Graph,
    comp: &NodeSet,
    rest: &NodeSet,
    cap: usize,
    component: usize,
    layer: usize,
    live: impl Fn(usize, u8) -> bool,
) -> Vec<ConnectorPath> {
    bounded_paths_by_role(g, comp, rest, cap, |role, v| match role {
        Role::Single => live(v, 1),
        Role::First => live(v, 2),
        Role::Second => live(v, 3),
    })
    .iter()
    .map(|p| ConnectorPath::from_bounded(p, component, layer))
    .collect()
}

fn first_in(g: &Graph, v: usize, side: &NodeSet) -> Option<usize> {
    g.neighbors(v).iter().copied().find(|&u| side.contains(u))
}

/// Shortens a long path that violates minimality and assigns types.
pub fn trim_to_minimal(g: &Graph, path: &BoundedPath, comp: &NodeSet, rest: &NodeSet) -> ConnectorPath {
    if let [u, w] = path.internals[..] {
        if let Some(end) = first_in(g, u, rest) {
            let short = BoundedPath {
                start: path.start,
                internals: vec![u],
                end,
            };
            return ConnectorPath::from_bounded(&short, 0, 0);
        }
        if let Some(start) = first_in(g, w, comp) {
            let short = BoundedPath {
                start,
                internals: vec![w],
                end: path.end,
            };
            return ConnectorPath::from_bounded(&short, 0, 0);
        }
    }
    ConnectorPath::from_bounded(path, 0, 0)
}

/// All internal copies of `path` are in the sampled next layer.
pub fn is_live_connector(path: &ConnectorPath, sampled_next_layer: &HashSet<VirtualNode>) -> bool {
    path.internals
        .iter()
        .all(|&(real, ty)| sampled_next_layer.contains(&VirtualNode::new(real, path.layer, ty)))
}
