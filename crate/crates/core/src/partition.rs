//! CDS partition construction on real nodes.
//!
//! Each node draws a layer in `1..=L` and a type in `1..=3` once. Layer-1
//! nodes go to random classes; each later layer is assigned by the same
//! greedy stages as the packing builder, with connector internals restricted
//! to nodes of that layer and of the matching type.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::graph::{is_cds, is_connected, is_dominating, Graph, NodeSet};
use crate::greedy::{assign_layer, ClassState, LayerStats};
use crate::packing::{BuildParams, FallbackPolicy};
use crate::virtual_graph::layer_count;

/// `floor(delta * k / log2(n)^5)`, or `floor(delta * k / log2(n)^2)` once
/// `k >= c * sqrt(n)`; at least 1.
pub fn partition_class_count(n: usize, k: usize, delta: f64, c: f64) -> usize {
    let log = (n.max(2) as f64).log2();
    let power = if k as f64 >= c * (n as f64).sqrt() { 2 } else { 5 };
    ((delta * k as f64 / log.powi(power)).floor() as usize).max(1)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NodeLabeling {
    pub layer: Vec<usize>,
    pub ty: Vec<u8>,
    pub class_of: Vec<Option<usize>>,
}

#[derive(Clone, Debug)]
pub struct PartitionOutcome {
    /// Disjoint sets covering `V`; the first `count` are CDSs.
    pub sets: Vec<NodeSet>,
    pub count: usize,
    /// Nonempty classes that failed the CDS test.
    pub absorbed: Vec<usize>,
    pub t: usize,
    pub layers: usize,
    pub labeling: NodeLabeling,
    pub m_trace: Vec<usize>,
    pub dominating_after_first_layer: Vec<bool>,
    pub layer_stats: Vec<LayerStats>,
    pub whole_set_fallback: bool,
}

impl PartitionOutcome {
    pub fn counted(&self) -> &[NodeSet] {
        &self.sets[..self.count]
    }
}

/// Partitions `V` into disjoint sets, as many of them CDSs as the greedy
/// construction manages.
pub fn build_partition(g: &Graph, k: usize, params: &BuildParams) -> Result<PartitionOutcome> {
    params.validate()?;
    if k < 1 {
        return domain("k must be at least 1");
    }
    let n = g.n();
    if n == 0 {
        return domain("graph is empty");
    }
    if !is_connected(g) {
        return Err(Error::Disconnected);
    }
    let layers = layer_count(n, params.lambda);
    let t = params
        .classes
        .unwrap_or_else(|| partition_class_count(n, k, params.delta, params.sqrt_factor));
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);

    let layer: Vec<usize> = (0..n).map(|_| rng.random_range(1..=layers)).collect();
    let ty: Vec<u8> = (0..n).map(|_| rng.random_range(1..=3u8)).collect();
    let mut class_of: Vec<Option<usize>> = vec![None; n];
    let mut state = ClassState::new(n, t);

    for v in (0..n).filter(|&v| layer[v] == 1) {
        let class = rng.random_range(0..t);
        class_of[v] = Some(class);
        state.add(g, class, v);
    }
    let dominating_after_first_layer = (0..t).map(|i| is_dominating(g, state.members(i))).collect();
    let mut m_trace = vec![state.excess()];
    let mut layer_stats = Vec::new();

    for next in 2..=layers {
        let mut new = [NodeSet::new(n), NodeSet::new(n), NodeSet::new(n)];
        for v in (0..n).filter(|&v| layer[v] == next) {
            new[usize::from(ty[v]) - 1].insert(v);
        }
        let (assigned, stats) = assign_layer(g, &mut state, t, next, &new, &mut rng)?;
        for a in assigned {
            if a.ty != ty[a.real] || class_of[a.real].replace(a.class).is_some() {
                return Err(Error::Invariant(format!("node {} assigned inconsistently", a.real)));
            }
        }
        layer_stats.push(stats);
        m_trace.push(state.excess());
    }

    let classes = state.into_members();
    let mut valid = Vec::new();
    let mut absorbed = Vec::new();
    for (i, c) in classes.iter().enumerate() {
        if is_cds(g, c) {
            valid.push(i);
        } else if !c.is_empty() {
            absorbed.push(i);
        }
    }

    let mut whole_set_fallback = false;
    let mut sets: Vec<NodeSet> = valid.iter().map(|&i| classes[i].clone()).collect();
    let count;
    if sets.is_empty() {
        sets.push(g.all_nodes());
        count = 1;
        whole_set_fallback = true;
    } else {
        count = sets.len();
        match params.fallback {
            FallbackPolicy::Absorb => {
                for &i in &absorbed {
                    sets[0].union_with(&classes[i]);
                }
            }
            FallbackPolicy::ReportPartial => {
                let mut rest = NodeSet::new(n);
                for &i in &absorbed {
                    rest.union_with(&classes[i]);
                }
                if !rest.is_empty() {
                    sets.push(rest);
                }
            }
        }
    }

    Ok(PartitionOutcome {
        sets,
        count,
        absorbed,
        t,
        layers,
        labeling: NodeLabeling { layer, ty, class_of },
        m_trace,
        dominating_after_first_layer,
        layer_stats,
        whole_set_fallback,
    })
}

/// Sets are pairwise disjoint, cover `0..n`, and the first `count` are CDSs.
pub fn check_partition(g: &Graph, sets: &[NodeSet], count: usize) -> bool {
    let mut seen = NodeSet::new(g.n());
    for s in sets {
        for v in s.iter() {
            if v >= g.n() || !seen.insert(v) {
                return false;
            }
        }
    }
    count <= sets.len() && seen.len() == g.n() && sets[..count].iter().all(|s| is_cds(g, s))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PartitionReport {
    pub count: usize,
    pub classes: Vec<Vec<usize>>,
    pub absorbed: Vec<usize>,
    pub t: usize,
    #[serde(rename = "L")]
    pub layers: usize,
    pub n: usize,
    pub k: usize,
    pub seed: u64,
    pub m_trace: Vec<usize>,
    pub whole_set_fallback: bool,
    pub valid: bool,
}

impl PartitionReport {
    pub fn from_outcome(g: &Graph, k: usize, seed: u64, out: &PartitionOutcome) -> Self {
        Self {
            count: out.count,
            classes: out.sets.iter().map(NodeSet::to_vec).collect(),
            absorbed: out.absorbed.clone(),
            t: out.t,
            layers: out.layers,
            n: g.n(),
            k,
            seed,
            m_trace: out.m_trace.clone(),
            whole_set_fallback: out.whole_set_fallback,
            valid: check_partition(g, &out.sets, out.count),
        }
    }
}
