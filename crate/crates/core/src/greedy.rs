//! Layer-by-layer class assignment shared by the packing and partition
//! builders.
//!
//! Each class keeps the set of real nodes it covers and a union-find over
//! them, so its component count is maintained incrementally. For one new
//! layer, every component of a class that is not alone collects up to `cap`
//! live connectors, and the new nodes are assigned in three stages: type-1
//! nodes that close short connectors, type-3 nodes (with their type-2
//! partners) that close long connectors, and finally everyone else at random.

use std::collections::{BTreeSet, HashMap};

use rand::Rng;
use serde::Serialize;

use crate::connector::{find_live_connectors, ConnectorKind, ConnectorPath};
use crate::error::{Error, Result};
use crate::graph::{Graph, NodeSet};
use crate::unionfind::DisjointSet;

/// Real-node footprint of every class plus per-class union-find.
#[derive(Clone, Debug)]
pub struct ClassState {
    members: Vec<NodeSet>,
    forests: Vec<DisjointSet>,
    components: Vec<usize>,
}

impl ClassState {
    pub fn new(n: usize, t: usize) -> Self {
        Self {
            members: vec![NodeSet::new(n); t],
            forests: vec![DisjointSet::new(n); t],
            components: vec![0; t],
        }
    }

    pub fn class_count(&self) -> usize {
        self.members.len()
    }

    pub fn members(&self, class: usize) -> &NodeSet {
        &self.members[class]
    }

    pub fn into_members(self) -> Vec<NodeSet> {
        self.members
    }

    /// Adds `real` to `class`. Returns `true` if it was new to the class.
    pub fn add(&mut self, g: &Graph, class: usize, real: usize) -> bool {
        if !self.members[class].insert(real) {
            return false;
        }
        self.components[class] += 1;
        for &u in g.neighbors(real) {
            if self.members[class].contains(u) && self.forests[class].union(real, u) {
                self.components[class] -= 1;
            }
        }
        true
    }

    /// Number of connected components of the class footprint.
    pub fn component_count(&self, class: usize) -> usize {
        self.components[class]
    }

    /// Total excess components `sum_i (N_i - 1)`, empty classes counting 0.
    pub fn excess(&self) -> usize {
        self.components.iter().map(|c| c.saturating_sub(1)).sum()
    }

    /// Components of a class, ordered by smallest member.
    pub fn class_components(&mut self, class: usize) -> Vec<NodeSet> {
        let n = self.members[class].capacity();
        let mut by_root: HashMap<usize, usize> = HashMap::new();
        let mut comps: Vec<NodeSet> = Vec::new();
        let members: Vec<usize> = self.members[class].iter().collect();
        for v in members {
            let root = self.forests[class].find(v);
            let idx = *by_root.entry(root).or_insert_with(|| {
                comps.push(NodeSet::new(n));
                comps.len() - 1
            });
            comps[idx].insert(v);
        }
        comps
    }
}

/// A new node assigned to a class.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Assignment {
    pub real: usize,
    pub ty: u8,
    pub class: usize,
}

#[derive(Clone, Debug)]
pub struct PooledConnector {
    pub class: usize,
    pub path: ConnectorPath,
}

/// Live connectors of one layer with removal bookkeeping.
#[derive(Clone, Debug, Default)]
pub struct ConnectorPool {
    items: Vec<PooledConnector>,
    alive: Vec<bool>,
    by_copy: HashMap<(usize, u8), Vec<usize>>,
    by_component: HashMap<usize, Vec<usize>>,
}

impl ConnectorPool {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registers a connector; `path.component` must be unique across classes.
    pub fn add(&mut self, class: usize, path: ConnectorPath) -> usize {
        let id = self.items.len();
        for &copy in &path.internals {
            self.by_copy.entry(copy).or_default().push(id);
        }
        self.by_component.entry(path.component).or_default().push(id);
        self.items.push(PooledConnector { class, path });
        self.alive.push(true);
        id
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn alive_count(&self) -> usize {
        self.alive.iter().filter(|&&a| a).count()
    }

    pub fn get(&self, id: usize) -> &PooledConnector {
        &self.items[id]
    }

    pub fn connectors(&self) -> impl Iterator<Item = &PooledConnector> {
        self.items.iter()
    }

    /// Alive connectors whose internals include the copy `(real, ty)`.
    pub fn through(&self, real: usize, ty: u8) -> Vec<usize> {
        self.by_copy
            .get(&(real, ty))
            .map(|ids| ids.iter().copied().filter(|&i| self.alive[i]).collect())
            .unwrap_or_default()
    }

    fn remove_through(&mut self, real: usize, ty: u8) -> usize {
        let ids = self.through(real, ty);
        ids.into_iter().filter(|&i| self.kill(i)).count()
    }

    fn remove_component(&mut self, component: usize) -> usize {
        let ids = self.by_component.get(&component).cloned().unwrap_or_default();
        ids.into_iter().filter(|&i| self.kill(i)).count()
    }

    fn kill(&mut self, id: usize) -> bool {
        std::mem::replace(&mut self.alive[id], false)
    }

    /// Each type-2 copy serves connectors of at most one component per class.
    pub fn type_two_exclusive(&self) -> bool {
        let mut owner: HashMap<(usize, usize), usize> = HashMap::new();
        self.items.iter().all(|c| {
            c.path
                .internals
                .iter()
                .filter(|&&(_, ty)| ty == 2)
                .all(|&(real, _)| *owner.entry((c.class, real)).or_insert(c.path.component) == c.path.component)
        })
    }
}

/// One greedy step: a node joined `class`, satisfying `delta` components.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StepRecord {
    pub real: usize,
    pub ty: u8,
    pub class: usize,
    pub delta: usize,
    pub removed: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct StageOutcome {
    pub assignments: Vec<Assignment>,
    pub steps: Vec<StepRecord>,
}

/// Class with the most distinct components among `ids`; ties go to the
/// lowest class id. Returns `(class, components)`.
fn best_class(pool: &ConnectorPool, ids: &[usize]) -> Option<(usize, BTreeSet<usize>)> {
    let mut per_class: HashMap<usize, BTreeSet<usize>> = HashMap::new();
    for &i in ids {
        let c = pool.get(i);
        per_class.entry(c.class).or_default().insert(c.path.component);
    }
    per_class
        .into_iter()
        .max_by(|(ca, sa), (cb, sb)| sa.len().cmp(&sb.len()).then(cb.cmp(ca)))
}

/// Stage I over type-1 new nodes in ascending order.
pub fn greedy_stage_one(pool: &mut ConnectorPool, type_one: &[usize]) -> StageOutcome {
    let mut out = StageOutcome::default();
    for &v in type_one {
        let ids: Vec<usize> = pool
            .through(v, 1)
            .into_iter()
            .filter(|&i| pool.get(i).path.kind == ConnectorKind::Short)
            .collect();
        let Some((class, comps)) = best_class(pool, &ids) else {
            continue;
        };
        let mut removed = pool.remove_through(v, 1);
        for &c in &comps {
            removed += pool.remove_component(c);
        }
        out.assignments.push(Assignment { real: v, ty: 1, class });
        out.steps.push(StepRecord {
            real: v,
            ty: 1,
            class,
            delta: comps.len(),
            removed,
        });
    }
    out
}

/// Stage II over type-3 new nodes in ascending order. Each chosen node
/// brings along the type-2 partners of the class's long connectors through
/// it.
pub fn greedy_stage_two(pool: &mut ConnectorPool, type_three: &[usize]) -> Result<StageOutcome> {
    let mut out = StageOutcome::default();
    let mut taken_partners: BTreeSet<usize> = BTreeSet::new();
    for &u in type_three {
        let ids: Vec<usize> = pool
            .through(u, 3)
            .into_iter()
            .filter(|&i| pool.get(i).path.kind == ConnectorKind::Long)
            .collect();
        let Some((class, comps)) = best_class(pool, &ids) else {
            continue;
        };
        let mut partners = Vec::new();
        for &comp in &comps {
            let id = ids
                .iter()
                .copied()
                .find(|&i| pool.get(i).class == class && pool.get(i).path.component == comp)
                .expect("component came from these ids");
            let (partner, ty) = pool.get(id).path.internals[0];
            debug_assert_eq!(ty, 2);
            if !taken_partners.insert(partner) {
                return Err(Error::Invariant(format!(
                    "type-2 copy of node {partner} assigned twice in one layer"
                )));
            }
            partners.push(partner);
        }
        let mut removed = pool.remove_through(u, 3);
        for &v in &partners {
            removed += pool.remove_through(v, 2);
        }
        for &c in &comps {
            removed += pool.remove_component(c);
        }
        out.assignments.push(Assignment { real: u, ty: 3, class });
        out.assignments
            .extend(partners.iter().map(|&v| Assignment { real: v, ty: 2, class }));
        out.steps.push(StepRecord {
            real: u,
            ty: 3,
            class,
            delta: comps.len(),
            removed,
        });
    }
    Ok(out)
}

/// Stage III: every remaining new copy joins a uniformly random class.
pub fn greedy_stage_three<R: Rng + ?Sized>(remaining: &[(usize, u8)], classes: usize, rng: &mut R) -> Vec<Assignment> {
    remaining
        .iter()
        .map(|&(real, ty)| Assignment {
            real,
            ty,
            class: rng.random_range(0..classes),
        })
        .collect()
}

/// Diagnostics for one layer transition.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct LayerStats {
    pub layer: usize,
    /// Components that were not alone in their class.
    pub components: usize,
    /// Of those, components that found the full `cap` connectors.
    pub components_at_cap: usize,
    pub connectors: usize,
    pub short_steps: usize,
    pub long_steps: usize,
    pub random_assignments: usize,
    /// Largest `removed / (delta * cap)` over greedy steps.
    pub max_budget_ratio: f64,
    pub budget_ok: bool,
    pub type_two_exclusive: bool,
}

/// Collects up to `cap` live connectors per component of every class that
/// has at least two components.
pub fn collect_connectors(
    g: &Graph,
    state: &mut ClassState,
    cap: usize,
    layer: usize,
    live: impl Fn(usize, u8) -> bool,
) -> (ConnectorPool, usize, usize) {
    let mut pool = ConnectorPool::new();
    let mut next_component = 0;
    let mut considered = 0;
    let mut at_cap = 0;
    for class in 0..state.class_count() {
        if state.component_count(class) < 2 {
            continue;
        }
        let comps = state.class_components(class);
        for comp in &comps {
            let mut rest = state.members(class).clone();
            rest.difference_with(comp);
            let found = find_live_connectors(g, comp, &rest, cap, next_component, layer, &live);
            considered += 1;
            if found.len() >= cap {
                at_cap += 1;
            }
            for path in found {
                pool.add(class, path);
            }
            next_component += 1;
        }
    }
    (pool, considered, at_cap)
}

/// Runs stages I-III for one layer. `new_by_type[ty - 1]` holds the real
/// nodes whose type-`ty` copy is new and sampled in this layer.
pub fn assign_layer<R: Rng + ?Sized>(
    g: &Graph,
    state: &mut ClassState,
    cap: usize,
    layer: usize,
    new_by_type: &[NodeSet; 3],
    rng: &mut R,
) -> Result<(Vec<Assignment>, LayerStats)> {
    let t = state.class_count();
    let (mut pool, components, components_at_cap) =
        collect_connectors(g, state, cap, layer, |r, ty| new_by_type[usize::from(ty) - 1].contains(r));
    let mut stats = LayerStats {
        layer,
        components,
        components_at_cap,
        connectors: pool.len(),
        type_two_exclusive: pool.type_two_exclusive(),
        budget_ok: true,
        ..Default::default()
    };

    let type_one: Vec<usize> = new_by_type[0].iter().collect();
    let type_three: Vec<usize> = new_by_type[2].iter().collect();
    let first = greedy_stage_one(&mut pool, &type_one);
    let second = greedy_stage_two(&mut pool, &type_three)?;
    for (steps, factor) in [(&first.steps, 2), (&second.steps, 3)] {
        for s in steps {
            let budget = s.delta * cap;
            stats.max_budget_ratio = stats.max_budget_ratio.max(s.removed as f64 / budget as f64);
            stats.budget_ok &= s.removed <= factor * budget;
        }
    }
    stats.short_steps = first.steps.len();
    stats.long_steps = second.steps.len();

    let mut assigned: BTreeSet<(usize, u8)> = BTreeSet::new();
    let mut all = first.assignments;
    all.extend(second.assignments);
    for a in &all {
        assigned.insert((a.real, a.ty));
    }
    let mut remaining: Vec<(usize, u8)> = Vec::new();
    for real in 0..g.n() {
        for ty in 1..=3u8 {
            if new_by_type[usize::from(ty) - 1].contains(real) && !assigned.contains(&(real, ty)) {
                remaining.push((real, ty));
            }
        }
    }
    let third = greedy_stage_three(&remaining, t, rng);
    stats.random_assignments = third.len();
    all.extend(third);
    for a in &all {
        state.add(g, a.class, a.real);
    }
    Ok((all, stats))
}
