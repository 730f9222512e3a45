//! CDS packing construction over the layered virtual graph.
//!
//! Sampled copies of layers `1..=L/2` are spread over `t` classes at random;
//! every later layer is assigned by the greedy stages so that class
//! components keep merging. Classes whose real projection is a CDS of the
//! sampled subgraph become packing entries with weight `1/mu`, where `mu` is
//! the largest number of entries sharing a real node.

use num_rational::Rational64;
use num_traits::{CheckedAdd, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::graph::{is_cds_within, is_connected_subset, is_dominating, Graph, NodeSet};
use crate::greedy::{assign_layer, ClassState, LayerStats};
use crate::verify::verify_packing;
use crate::virtual_graph::{sample_virtual_layer, LayerConfig, VirtualNode};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PackingEntry {
    pub nodes: NodeSet,
    pub weight: Rational64,
}

/// Weighted family of node sets.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CdsPacking {
    pub entries: Vec<PackingEntry>,
}

impl CdsPacking {
    pub fn new() -> Self {
        Self::default()
    }

    /// All `sets` with the common weight `weight`.
    pub fn uniform(sets: Vec<NodeSet>, weight: Rational64) -> Self {
        Self {
            entries: sets.into_iter().map(|nodes| PackingEntry { nodes, weight }).collect(),
        }
    }

    pub fn push(&mut self, nodes: NodeSet, weight: Rational64) {
        self.entries.push(PackingEntry { nodes, weight });
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Exact sum of weights; `None` on `i64` overflow.
    pub fn size_exact(&self) -> Option<Rational64> {
        self.entries
            .iter()
            .try_fold(Rational64::zero(), |acc, e| acc.checked_add(&e.weight))
    }

    pub fn size(&self) -> f64 {
        self.entries.iter().map(|e| ratio_f64(e.weight)).sum()
    }

    /// Per-node weight sums over `n` nodes.
    pub fn loads(&self, n: usize) -> Vec<f64> {
        let mut load = vec![0.0; n];
        for e in &self.entries {
            let w = ratio_f64(e.weight);
            for v in e.nodes.iter().filter(|&v| v < n) {
                load[v] += w;
            }
        }
        load
    }

    /// Copy with every weight multiplied by `factor`.
    pub fn scaled(&self, factor: Rational64) -> Self {
        Self {
            entries: self
                .entries
                .iter()
                .map(|e| PackingEntry {
                    nodes: e.nodes.clone(),
                    weight: e.weight * factor,
                })
                .collect(),
        }
    }
}

pub(crate) fn ratio_f64(r: Rational64) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FallbackPolicy {
    /// Fold failed classes into the lowest-id valid class.
    Absorb,
    /// Return only the classes that passed.
    ReportPartial,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BuildParams {
    pub lambda: f64,
    pub delta: f64,
    pub p: f64,
    pub seed: u64,
    pub fallback: FallbackPolicy,
    /// Re-select each entry as a low-overlap CDS inside its class before
    /// weighting. Only applied when it lowers the maximum multiplicity.
    pub reduce_overlap: bool,
    /// Forces the class count instead of deriving it from `delta`.
    pub classes: Option<usize>,
    /// Partition builder: use the larger class count once `k >= c * sqrt(n)`.
    pub sqrt_factor: f64,
}

impl Default for BuildParams {
    fn default() -> Self {
        Self {
            lambda: 4.0,
            delta: 1.0 / 16.0,
            p: 1.0,
            seed: 0,
            fallback: FallbackPolicy::Absorb,
            reduce_overlap: true,
            classes: None,
            sqrt_factor: 1.0,
        }
    }
}

impl BuildParams {
    pub(crate) fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta <= 1.0) {
            return domain(format!("delta must lie in (0, 1], got {}", self.delta));
        }
        if !(self.lambda >= 1.0 && self.lambda.is_finite()) {
            return domain(format!("lambda must be >= 1, got {}", self.lambda));
        }
        if !(0.0..=1.0).contains(&self.p) {
            return domain(format!("p must lie in [0, 1], got {}", self.p));
        }
        if self.classes == Some(0) {
            return domain("class count override must be positive");
        }
        Ok(())
    }
}

/// `max(1, floor(delta * k * q^2))`.
pub fn packing_class_count(k: usize, q: f64, delta: f64) -> usize {
    ((delta * k as f64 * q * q).floor() as usize).max(1)
}

const UNASSIGNED: u32 = u32::MAX;

/// Class of every sampled virtual node plus the merge trace.
#[derive(Clone, Debug, Serialize)]
pub struct ClassAssignment {
    pub n: usize,
    pub layers: usize,
    pub copies_per_layer: usize,
    pub t: usize,
    /// Last layer filled at random.
    pub jump_start_layers: usize,
    #[serde(skip)]
    class_of: Vec<u32>,
    /// `M` after the jump-start, then after each greedy layer.
    pub m_trace: Vec<usize>,
    /// Per-class component counts, indexed like `m_trace`.
    pub n_trace: Vec<Vec<usize>>,
    pub dominating_after_jump_start: Vec<bool>,
    pub layer_stats: Vec<LayerStats>,
}

impl ClassAssignment {
    fn new(n: usize, layers: usize, copies_per_layer: usize, t: usize, jump_start_layers: usize) -> Self {
        Self {
            n,
            layers,
            copies_per_layer,
            t,
            jump_start_layers,
            class_of: vec![UNASSIGNED; n * layers * copies_per_layer],
            m_trace: Vec::new(),
            n_trace: Vec::new(),
            dominating_after_jump_start: Vec::new(),
            layer_stats: Vec::new(),
        }
    }

    fn slot(&self, v: VirtualNode) -> usize {
        ((v.layer - 1) * self.copies_per_layer + usize::from(v.ty) - 1) * self.n + v.real
    }

    fn set(&mut self, v: VirtualNode, class: usize) -> Result<()> {
        let slot = self.slot(v);
        if self.class_of[slot] != UNASSIGNED {
            return Err(Error::Invariant(format!("virtual node {v:?} assigned twice")));
        }
        self.class_of[slot] = class as u32;
        Ok(())
    }

    /// Class of a virtual node, `None` if it was not sampled.
    pub fn class_of(&self, v: VirtualNode) -> Option<usize> {
        if v.real >= self.n || v.layer == 0 || v.layer > self.layers || v.ty == 0 || usize::from(v.ty) > self.copies_per_layer {
            return None;
        }
        match self.class_of[self.slot(v)] {
            UNASSIGNED => None,
            c => Some(c as usize),
        }
    }

    pub fn assigned_count(&self) -> usize {
        self.class_of.iter().filter(|&&c| c != UNASSIGNED).count()
    }

    pub fn all_dominate(&self) -> bool {
        self.dominating_after_jump_start.iter().all(|&d| d)
    }

    pub fn merging_monotone(&self) -> bool {
        self.m_trace.windows(2).all(|w| w[1] <= w[0])
    }

    pub fn final_excess(&self) -> usize {
        self.m_trace.last().copied().unwrap_or(0)
    }

    fn record(&mut self, state: &ClassState) {
        self.m_trace.push(state.excess());
        self.n_trace
            .push((0..state.class_count()).map(|i| state.component_count(i)).collect());
    }
}

#[derive(Clone, Debug)]
pub struct PackingOutcome {
    pub packing: CdsPacking,
    pub assignment: ClassAssignment,
    pub sampled: NodeSet,
    pub k: usize,
    pub params: BuildParams,
    pub q: f64,
    /// Maximum number of entries sharing a node.
    pub mu: usize,
    /// Classes whose projection was a CDS.
    pub valid_classes: Vec<usize>,
    /// Nonempty classes that failed and were folded in (or dropped).
    pub failed_classes: Vec<usize>,
    pub whole_set_fallback: bool,
    pub overlap_reduced: bool,
    pub valid: bool,
}

fn max_multiplicity(n: usize, sets: &[NodeSet]) -> usize {
    let mut count = vec![0usize; n];
    for s in sets {
        for v in s.iter() {
            count[v] += 1;
        }
    }
    count.into_iter().max().unwrap_or(0)
}

/// Builds a CDS packing of the nodes sampled with probability `params.p`.
pub fn build_packing(g: &Graph, k: usize, params: &BuildParams) -> Result<PackingOutcome> {
    params.validate()?;
    if k < 1 {
        return domain("k must be at least 1");
    }
    let n = g.n();
    if n == 0 {
        return domain("graph is empty");
    }
    let cfg = LayerConfig::new(n, params.lambda, params.p, 3)?;
    let layers = cfg.layers;
    let t = params
        .classes
        .unwrap_or_else(|| packing_class_count(k, cfg.q, params.delta));
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);

    let mut by_layer: Vec<[NodeSet; 3]> = Vec::with_capacity(layers);
    let mut sampled = NodeSet::new(n);
    for layer in 1..=layers {
        let mut sets = [NodeSet::new(n), NodeSet::new(n), NodeSet::new(n)];
        for v in sample_virtual_layer(g, &cfg, layer, &mut rng)? {
            sets[usize::from(v.ty) - 1].insert(v.real);
            sampled.insert(v.real);
        }
        by_layer.push(sets);
    }

    let jump = layers / 2;
    let mut assignment = ClassAssignment::new(n, layers, 3, t, jump);
    let mut state = ClassState::new(n, t);
    for (idx, sets) in by_layer.iter().enumerate().take(jump) {
        for real in 0..n {
            for ty in 1..=3u8 {
                if sets[usize::from(ty) - 1].contains(real) {
                    let class = rng.random_range(0..t);
                    assignment.set(VirtualNode::new(real, idx + 1, ty), class)?;
                    state.add(g, class, real);
                }
            }
        }
    }
    assignment.dominating_after_jump_start = (0..t).map(|i| is_dominating(g, state.members(i))).collect();
    assignment.record(&state);

    for layer in jump + 1..=layers {
        let (assigned, stats) = assign_layer(g, &mut state, t, layer, &by_layer[layer - 1], &mut rng)?;
        for a in assigned {
            assignment.set(VirtualNode::new(a.real, layer, a.ty), a.class)?;
        }
        assignment.layer_stats.push(stats);
        assignment.record(&state);
    }

    let classes = state.into_members();
    let mut valid_classes = Vec::new();
    let mut failed_classes = Vec::new();
    for (i, c) in classes.iter().enumerate() {
        if is_cds_within(g, &sampled, c) {
            valid_classes.push(i);
        } else if !c.is_empty() {
            failed_classes.push(i);
        }
    }

    let mut whole_set_fallback = false;
    let mut sets: Vec<NodeSet> = valid_classes.iter().map(|&i| classes[i].clone()).collect();
    if params.fallback == FallbackPolicy::Absorb {
        if let Some(first) = sets.first_mut() {
            for &i in &failed_classes {
                first.union_with(&classes[i]);
            }
        } else if !sampled.is_empty() && is_connected_subset(g, &sampled) {
            sets.push(sampled.clone());
            whole_set_fallback = true;
        }
    }

    let mut mu = max_multiplicity(n, &sets);
    let mut overlap_reduced = false;
    if params.reduce_overlap && mu >= 2 {
        let reduced = reduce_overlap(g, &sampled, &sets);
        let reduced_mu = max_multiplicity(n, &reduced);
        if reduced_mu < mu {
            sets = reduced;
            mu = reduced_mu;
            overlap_reduced = true;
        }
    }

    let packing = if sets.is_empty() {
        CdsPacking::new()
    } else {
        CdsPacking::uniform(sets, Rational64::new(1, mu as i64))
    };
    let valid = verify_packing(g, &packing, &sampled).pass;
    Ok(PackingOutcome {
        packing,
        assignment,
        sampled,
        k,
        params: params.clone(),
        q: cfg.q,
        mu,
        valid_classes,
        failed_classes,
        whole_set_fallback,
        overlap_reduced,
        valid,
    })
}

/// Replaces each set by a CDS of `G[universe]` chosen inside it, preferring
/// nodes not yet used by earlier entries, then gives every uncovered node of
/// `universe` to the smallest entry adjacent to it. Sets that yield no CDS
/// are kept whole.
pub fn reduce_overlap(g: &Graph, universe: &NodeSet, sets: &[NodeSet]) -> Vec<NodeSet> {
    let n = g.n();
    let mut load = vec![0u32; n];
    let mut out: Vec<NodeSet> = Vec::with_capacity(sets.len());
    for s in sets {
        let chosen = low_load_cds(g, universe, s, &load).unwrap_or_else(|| s.clone());
        for v in chosen.iter() {
            load[v] += 1;
        }
        out.push(chosen);
    }
    let mut sizes: Vec<usize> = out.iter().map(NodeSet::len).collect();
    for v in universe.iter() {
        if load[v] > 0 {
            continue;
        }
        let target = (0..out.len())
            .filter(|&j| g.neighbors(v).iter().any(|&u| out[j].contains(u)))
            .min_by_key(|&j| (sizes[j], j));
        if let Some(j) = target {
            out[j].insert(v);
            sizes[j] += 1;
            load[v] = 1;
        }
    }
    out
}

const WHITE: u8 = 0;
const GRAY: u8 = 1;
const BLACK: u8 = 2;

/// Greedy connected dominating set of `G[universe]` using only `allowed`
/// nodes. Picks by (lowest load, most newly dominated, lowest id); bridges
/// with a shortest path through `allowed` when no neighbor of the current
/// set helps.
fn low_load_cds(g: &Graph, universe: &NodeSet, allowed: &NodeSet, load: &[u32]) -> Option<NodeSet> {
    let n = g.n();
    let mut color = vec![WHITE; n];
    let mut gain = vec![0u32; n];
    for v in universe.iter() {
        gain[v] = 1 + g.neighbors(v).iter().filter(|&&u| universe.contains(u)).count() as u32;
    }
    let mut white_left = universe.len();
    let mut black = NodeSet::new(n);

    let cool = |y: usize, gain: &mut Vec<u32>| {
        gain[y] -= 1;
        for &x in g.neighbors(y) {
            if universe.contains(x) {
                gain[x] -= 1;
            }
        }
    };
    let blacken = |v: usize, color: &mut Vec<u8>, gain: &mut Vec<u32>, white_left: &mut usize, black: &mut NodeSet| {
        if color[v] == WHITE {
            cool(v, gain);
            *white_left -= 1;
        }
        color[v] = BLACK;
        black.insert(v);
        for &y in g.neighbors(v) {
            if universe.contains(y) && color[y] == WHITE {
                cool(y, gain);
                color[y] = GRAY;
                *white_left -= 1;
            }
        }
    };

    let candidates: Vec<usize> = allowed.iter().filter(|&v| universe.contains(v)).collect();
    let start = candidates
        .iter()
        .copied()
        .min_by_key(|&v| (load[v], std::cmp::Reverse(gain[v]), v))?;
    blacken(start, &mut color, &mut gain, &mut white_left, &mut black);

    while white_left > 0 {
        let next = candidates
            .iter()
            .copied()
            .filter(|&v| color[v] == GRAY && gain[v] > 0)
            .min_by_key(|&v| (load[v], std::cmp::Reverse(gain[v]), v));
        if let Some(v) = next {
            blacken(v, &mut color, &mut gain, &mut white_left, &mut black);
            continue;
        }
        // Shortest bridge from the current set to a useful allowed node.
        let mut parent = vec![usize::MAX; n];
        let mut queue = std::collections::VecDeque::new();
        for v in black.iter() {
            parent[v] = v;
            queue.push_back(v);
        }
        let mut found = None;
        while let Some(x) = queue.pop_front() {
            for &y in g.neighbors(x) {
                if parent[y] != usize::MAX || !allowed.contains(y) || !universe.contains(y) {
                    continue;
                }
                parent[y] = x;
                if gain[y] > 0 {
                    found = Some(y);
                    break;
                }
                queue.push_back(y);
            }
            if found.is_some() {
                break;
            }
        }
        let mut path = Vec::new();
        let mut cur = found?;
        while color[cur] != BLACK {
            path.push(cur);
            cur = parent[cur];
        }
        for &v in path.iter().rev() {
            blacken(v, &mut color, &mut gain, &mut white_left, &mut black);
        }
    }
    is_cds_within(g, universe, &black).then_some(black)
}

/// JSON form of a packing run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PackingReport {
    pub n: usize,
    pub k: usize,
    pub p: f64,
    pub t: usize,
    #[serde(rename = "L")]
    pub layers: usize,
    pub classes: Vec<Vec<usize>>,
    pub weights: Vec<f64>,
    /// Weights as exact fractions `a/b`.
    #[serde(default)]
    pub weights_exact: Vec<String>,
    pub size: f64,
    pub valid: bool,
    #[serde(default)]
    pub m_trace: Vec<usize>,
    #[serde(default)]
    pub sampled: Option<Vec<usize>>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub lambda: Option<f64>,
    #[serde(default)]
    pub delta: Option<f64>,
    #[serde(default)]
    pub q: Option<f64>,
    #[serde(default)]
    pub mu: Option<usize>,
    #[serde(default)]
    pub failed_classes: Vec<usize>,
    #[serde(default)]
    pub whole_set_fallback: bool,
    #[serde(default)]
    pub overlap_reduced: bool,
    #[serde(default)]
    pub dominating_after_jump_start: Vec<bool>,
}

impl PackingReport {
    pub fn from_outcome(n: usize, out: &PackingOutcome) -> Self {
        let entries = &out.packing.entries;
        Self {
            n,
            k: out.k,
            p: out.params.p,
            t: out.assignment.t,
            layers: out.assignment.layers,
            classes: entries.iter().map(|e| e.nodes.to_vec()).collect(),
            weights: entries.iter().map(|e| ratio_f64(e.weight)).collect(),
            weights_exact: entries.iter().map(|e| e.weight.to_string()).collect(),
            size: out.packing.size(),
            valid: out.valid,
            m_trace: out.assignment.m_trace.clone(),
            sampled: Some(out.sampled.to_vec()),
            seed: Some(out.params.seed),
            lambda: Some(out.params.lambda),
            delta: Some(out.params.delta),
            q: Some(out.q),
            mu: Some(out.mu),
            failed_classes: out.failed_classes.clone(),
            whole_set_fallback: out.whole_set_fallback,
            overlap_reduced: out.overlap_reduced,
            dominating_after_jump_start: out.assignment.dominating_after_jump_start.clone(),
        }
    }

    /// Rebuilds the packing. Exact weights win over floats when present.
    pub fn packing(&self) -> Result<CdsPacking> {
        if self.classes.len() != self.weights.len() {
            return Err(Error::Contract("classes and weights differ in length".into()));
        }
        let exact = self.weights_exact.len() == self.classes.len();
        let mut packing = CdsPacking::new();
        for (i, members) in self.classes.iter().enumerate() {
            let nodes = NodeSet::from_members(self.n, members.iter().copied())?;
            let weight = if exact {
                self.weights_exact[i]
                    .parse::<Rational64>()
                    .map_err(|e| Error::Contract(format!("bad exact weight {:?}: {e}", self.weights_exact[i])))?
            } else {
                Rational64::approximate_float(self.weights[i])
                    .ok_or_else(|| Error::Contract(format!("weight {} not representable", self.weights[i])))?
            };
            packing.push(nodes, weight);
        }
        Ok(packing)
    }

    pub fn sampled_set(&self) -> Result<NodeSet> {
        match &self.sampled {
            Some(s) => NodeSet::from_members(self.n, s.iter().copied()),
            None => Ok(NodeSet::full(self.n)),
        }
    }
}
