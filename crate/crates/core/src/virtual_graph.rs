//! The layered virtual graph: `L` layers, each holding one or three typed
//! copies of `G`. Two copies are adjacent iff they copy the same real node or
//! two adjacent real nodes, so adjacency is always derived from `G`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::graph::{Graph, NodeSet};
use crate::unionfind::DisjointSet;

/// A copy of real node `real` in `layer` (1-based) with type `ty` (1..=3).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct VirtualNode {
    pub real: usize,
    pub layer: usize,
    pub ty: u8,
}

impl VirtualNode {
    pub fn new(real: usize, layer: usize, ty: u8) -> Self {
        Self { real, layer, ty }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayerConfig {
    pub layers: usize,
    pub copies_per_layer: usize,
    pub lambda: f64,
    pub p: f64,
    pub q: f64,
}

/// `max(2, ceil(lambda * log2 n))`.
pub fn layer_count(n: usize, lambda: f64) -> usize {
    let log = (n.max(1) as f64).log2();
    ((lambda * log).ceil() as usize).max(2)
}

impl LayerConfig {
    pub fn new(n: usize, lambda: f64, p: f64, copies_per_layer: usize) -> Result<Self> {
        if !(lambda >= 1.0 && lambda.is_finite()) {
            return domain(format!("lambda must be >= 1, got {lambda}"));
        }
        if copies_per_layer != 1 && copies_per_layer != 3 {
            return domain(format!("copies per layer must be 1 or 3, got {copies_per_layer}"));
        }
        let layers = layer_count(n, lambda);
        let q = coupling_probability(p, copies_per_layer * layers)?;
        Ok(Self {
            layers,
            copies_per_layer,
            lambda,
            p,
            q,
        })
    }

    pub fn total_copies(&self) -> usize {
        self.layers * self.copies_per_layer
    }
}

/// Per-copy probability `q` with `1 - (1 - q)^copies = p`.
pub fn coupling_probability(p: f64, total_copies: usize) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return domain(format!("probability {p} outside [0, 1]"));
    }
    if total_copies == 0 {
        return domain("need at least one copy");
    }
    if p == 1.0 {
        return Ok(1.0);
    }
    Ok(-f64::exp_m1(f64::ln_1p(-p) / total_copies as f64))
}

pub fn virtual_adjacent(g: &Graph, a: VirtualNode, b: VirtualNode) -> bool {
    a != b && (a.real == b.real || g.has_edge(a.real, b.real))
}

/// Real nodes with at least one copy in `vs`.
pub fn project<'a>(n: usize, vs: impl IntoIterator<Item = &'a VirtualNode>) -> NodeSet {
    let mut out = NodeSet::new(n);
    for v in vs {
        out.insert(v.real);
    }
    out
}

/// Samples each copy of `layer` independently with probability `cfg.q`.
/// Output is sorted by `(real, ty)`.
pub fn sample_virtual_layer<R: Rng + ?Sized>(
    g: &Graph,
    cfg: &LayerConfig,
    layer: usize,
    rng: &mut R,
) -> Result<Vec<VirtualNode>> {
    if layer == 0 || layer > cfg.layers {
        return domain(format!("layer {layer} outside 1..={}", cfg.layers));
    }
    let mut out = Vec::new();
    for real in 0..g.n() {
        for ty in 1..=cfg.copies_per_layer as u8 {
            if cfg.q >= 1.0 || rng.random::<f64>() < cfg.q {
                out.push(VirtualNode::new(real, layer, ty));
            }
        }
    }
    Ok(out)
}

/// Components of the virtual subgraph induced by `vs`, found with a
/// union-find keyed by position in `vs`. Each component is sorted.
pub fn virtual_components(g: &Graph, vs: &[VirtualNode]) -> Vec<Vec<VirtualNode>> {
    let mut ds = DisjointSet::new(vs.len());
    let mut first_copy = vec![usize::MAX; g.n()];
    for (i, v) in vs.iter().enumerate() {
        match first_copy[v.real] {
            usize::MAX => first_copy[v.real] = i,
            j => {
                ds.union(i, j);
            }
        }
    }
    for (u, w) in g.edges() {
        if first_copy[u] != usize::MAX && first_copy[w] != usize::MAX {
            ds.union(first_copy[u], first_copy[w]);
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<VirtualNode>> = Default::default();
    for (i, v) in vs.iter().enumerate() {
        groups.entry(ds.find(i)).or_default().push(*v);
    }
    let mut comps: Vec<Vec<VirtualNode>> = groups
        .into_values()
        .map(|mut c| {
            c.sort();
            c
        })
        .collect();
    comps.sort();
    comps
}
