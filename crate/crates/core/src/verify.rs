//! Independent checks of packings plus exhaustive oracles for small graphs.

use serde::Serialize;

use crate::error::{domain, Result};
use crate::flow::vertex_connectivity;
use crate::graph::{is_cds_within, Graph, NodeSet};
use crate::packing::CdsPacking;

pub const WEIGHT_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyReport {
    /// Per entry: CDS of `g[sampled]` with positive weight at most 1.
    pub entries_valid: Vec<bool>,
    pub max_load: f64,
    /// Node with the largest weight sum.
    pub max_load_node: Option<usize>,
    pub size: f64,
    pub pass: bool,
}

/// Checks every entry is a CDS of `g[sampled]` and that no node carries
/// total weight above `1 + 1e-9`.
pub fn verify_packing(g: &Graph, packing: &CdsPacking, sampled: &NodeSet) -> VerifyReport {
    let entries_valid: Vec<bool> = packing
        .entries
        .iter()
        .map(|e| {
            let w = *e.weight.numer() as f64 / *e.weight.denom() as f64;
            w > 0.0 && w <= 1.0 + WEIGHT_TOLERANCE && is_cds_within(g, sampled, &e.nodes)
        })
        .collect();
    let loads = packing.loads(g.n());
    let (max_load_node, max_load) = loads
        .iter()
        .copied()
        .enumerate()
        .fold((None, 0.0), |(bv, bl), (v, l)| if l > bl { (Some(v), l) } else { (bv, bl) });
    let pass = entries_valid.iter().all(|&ok| ok) && max_load <= 1.0 + WEIGHT_TOLERANCE;
    VerifyReport {
        entries_valid,
        max_load,
        max_load_node,
        size: packing.size(),
        pass,
    }
}

/// `size <= k + 1e-9` against the exact connectivity. `None` for complete
/// graphs, where the bound does not apply.
pub fn check_packing_upper_bound(g: &Graph, packing: &CdsPacking) -> Result<Option<bool>> {
    if g.is_complete() {
        return Ok(None);
    }
    let k = vertex_connectivity(g)?;
    Ok(Some(packing.size() <= k as f64 + WEIGHT_TOLERANCE))
}

const BRUTE_FORCE_LIMIT: usize = 12;

fn small_masks(g: &Graph) -> Result<Vec<u32>> {
    masks_up_to(g, BRUTE_FORCE_LIMIT)
}

fn masks_up_to(g: &Graph, limit: usize) -> Result<Vec<u32>> {
    if g.n() > limit {
        return domain(format!("exhaustive search limited to n <= {limit}, got {}", g.n()));
    }
    Ok((0..g.n())
        .map(|v| g.neighbors(v).iter().fold(0u32, |m, &u| m | (1 << u)))
        .collect())
}

/// Whether the nodes in `mask` induce a connected subgraph (false if empty).
pub(crate) fn mask_connected(adj: &[u32], mask: u32) -> bool {
    if mask == 0 {
        return false;
    }
    let mut reached = mask & mask.wrapping_neg();
    loop {
        let mut next = reached;
        let mut bits = reached;
        while bits != 0 {
            let v = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            next |= adj[v] & mask;
        }
        if next == reached {
            return reached == mask;
        }
        reached = next;
    }
}

/// CDS test on bitmasks within the node set `universe`.
pub(crate) fn mask_is_cds(adj: &[u32], universe: u32, mask: u32) -> bool {
    if mask == 0 || mask & !universe != 0 {
        return false;
    }
    let mut covered = mask;
    let mut bits = mask;
    while bits != 0 {
        let v = bits.trailing_zeros() as usize;
        bits &= bits - 1;
        covered |= adj[v];
    }
    covered & universe == universe && mask_connected(adj, mask)
}

/// Minimum number of nodes whose removal disconnects `g`, by enumerating
/// every node subset; `n - 1` when no subset does.
pub fn brute_force_vertex_connectivity(g: &Graph) -> Result<usize> {
    let adj = small_masks(g)?;
    let n = g.n();
    if n < 2 {
        return domain(format!("vertex connectivity needs at least 2 nodes, got {n}"));
    }
    let full = (1u32 << n) - 1;
    let mut best = n - 1;
    for cut in 0..full {
        let size = cut.count_ones() as usize;
        if size >= best || n - size < 2 {
            continue;
        }
        if !mask_connected(&adj, full & !cut) {
            best = size;
        }
    }
    Ok(best)
}

const ENUMERATION_LIMIT: usize = 30;

/// Smallest `|S ∩ target|` over every CDS `S` of `g`, by enumerating all
/// `2^n` node subsets (`n <= 30`). `None` when `g` has no CDS.
pub fn min_cds_overlap(g: &Graph, target: &NodeSet) -> Result<Option<usize>> {
    let adj = masks_up_to(g, ENUMERATION_LIMIT)?;
    let n = g.n();
    if n == 0 {
        return Ok(None);
    }
    let full = (1u32 << n) - 1;
    let tmask = target.iter().fold(0u32, |m, v| m | (1 << v));
    let mut best: Option<u32> = None;
    for mask in 1..=full {
        let overlap = (mask & tmask).count_ones();
        if best.is_some_and(|b| overlap >= b) {
            continue;
        }
        if mask_is_cds(&adj, full, mask) {
            best = Some(overlap);
        }
    }
    Ok(best.map(|b| b as usize))
}

/// Largest number of pairwise disjoint CDSs of `g`, found by packing
/// inclusion-minimal CDSs. Any CDS partition shrinks to such a packing and
/// any such packing extends to a partition by handing leftover nodes to an
/// adjacent set, so the two maxima agree.
pub fn brute_force_max_cds_partition(g: &Graph) -> Result<usize> {
    let adj = small_masks(g)?;
    let n = g.n();
    if n == 0 {
        return Ok(0);
    }
    let full = (1u32 << n) - 1;
    let is_cds: Vec<bool> = (0..=full).map(|m| mask_is_cds(&adj, full, m)).collect();
    let minimal: Vec<u32> = (1..=full)
        .filter(|&m| is_cds[m as usize])
        .filter(|&m| {
            let mut bits = m;
            while bits != 0 {
                let b = bits & bits.wrapping_neg();
                bits ^= b;
                if is_cds[(m ^ b) as usize] {
                    return false;
                }
            }
            true
        })
        .collect();
    let smallest = minimal.iter().map(|m| m.count_ones()).min().unwrap_or(1).max(1);

    fn search(minimal: &[u32], from: usize, used: u32, count: usize, n: usize, smallest: u32, best: &mut usize) {
        *best = (*best).max(count);
        let free = n as u32 - used.count_ones();
        if count + (free / smallest) as usize <= *best {
            return;
        }
        for i in from..minimal.len() {
            if minimal[i] & used == 0 {
                search(minimal, i + 1, used | minimal[i], count + 1, n, smallest, best);
            }
        }
    }
    let mut best = 0;
    search(&minimal, 0, 0, 0, n, smallest, &mut best);
    Ok(best)
}
