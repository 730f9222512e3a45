//! Graph families with known vertex connectivity.
//!
//! Besides the classic small graphs, this module builds the two-layer
//! "clique plus k-subsets" graph whose fractional connected domatic number is
//! below 2 despite connectivity `k`, its randomly thinned variant, the chain of
//! cliques that is fragile under vertex sampling, and Harary graphs.

use itertools::Itertools;
use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{domain, Result};
use crate::graph::Graph;

/// Description of a generated instance, written next to edge-list files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphMeta {
    pub family: String,
    pub n: usize,
    /// Declared vertex connectivity.
    pub k: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Second-layer nodes added only to reach the requested size.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub padding: Vec<usize>,
}

pub fn complete(n: usize) -> Graph {
    Graph::from_edges(n, (0..n).tuple_combinations()).expect("valid edges")
}

pub fn cycle(n: usize) -> Graph {
    assert!(n >= 3, "cycle needs at least 3 nodes");
    Graph::from_edges(n, (0..n).map(|i| (i, (i + 1) % n))).expect("valid edges")
}

pub fn path(n: usize) -> Graph {
    Graph::from_edges(n, (1..n).map(|i| (i - 1, i))).expect("valid edges")
}

/// Star with center 0 and `leaves` leaves.
pub fn star(leaves: usize) -> Graph {
    Graph::from_edges(leaves + 1, (1..=leaves).map(|i| (0, i))).expect("valid edges")
}

/// Petersen graph: outer cycle 0..5, inner pentagram 5..10, spokes i -- i+5.
pub fn petersen() -> Graph {
    let outer = (0..5).map(|i| (i, (i + 1) % 5));
    let inner = (0..5).map(|i| (5 + i, 5 + (i + 2) % 5));
    let spokes = (0..5).map(|i| (i, i + 5));
    Graph::from_edges(10, outer.chain(inner).chain(spokes)).expect("valid edges")
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// Clique `A` on nodes `0..2k` plus one node per `k`-subset of `A` (in
/// lexicographic order), adjacent exactly to that subset.
pub fn sanders_graph(k: usize) -> Result<Graph> {
    if !(1..=12).contains(&k) {
        return domain(format!("sanders_graph needs 1 <= k <= 12, got {k}"));
    }
    let a = 2 * k;
    let b = binomial(a, k);
    let mut edges: Vec<(usize, usize)> = (0..a).tuple_combinations().collect();
    for (idx, subset) in (0..a).combinations(k).enumerate() {
        edges.extend(subset.into_iter().map(|x| (x, a + idx)));
    }
    Graph::from_edges(a + b, edges)
}

/// Keep-probability for second-layer nodes in the thinned variant:
/// `65 beta^2 / C(2k - beta, k)` with `beta = log2(eta) / 8`, clamped to 1.
pub fn sanders_keep_probability(k: usize, eta: usize) -> f64 {
    let beta = (eta as f64).log2() / 8.0;
    let top = 2.0 * k as f64 - beta;
    let ln_binom = ln_gamma(top + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma(top - k as f64 + 1.0);
    (65.0 * beta * beta / ln_binom.exp()).min(1.0)
}

/// Thinned two-layer graph with exactly `eta` nodes and connectivity `k`.
///
/// All of `A` is kept and each `k`-subset node survives independently with
/// [`sanders_keep_probability`]. If too few survive, the graph is padded with
/// second-layer nodes adjacent to all of `A`; if too many survive, a uniform
/// subset of them is kept. At least one genuine `k`-subset node is always
/// present, which pins the connectivity at `k`.
pub fn sanders_subsampled<R: Rng + ?Sized>(k: usize, eta: usize, rng: &mut R) -> Result<(Graph, GraphMeta)> {
    if k == 0 || k > 12 {
        return domain(format!("sanders_subsampled needs 1 <= k <= 12, got {k}"));
    }
    let upper = 1usize << k;
    if eta < 4 * k || eta > upper {
        return domain(format!("eta must lie in [4k, 2^k] = [{}, {upper}], got {eta}", 4 * k));
    }
    let a = 2 * k;
    let p = sanders_keep_probability(k, eta);
    let mut kept: Vec<Vec<usize>> = (0..a).combinations(k).filter(|_| rng.random_bool(p)).collect();
    let room = eta - a;
    if kept.len() > room {
        // Partial Fisher-Yates keeps a uniform subset in original order.
        let mut idx: Vec<usize> = (0..kept.len()).collect();
        for i in 0..room {
            let j = rng.random_range(i..idx.len());
            idx.swap(i, j);
        }
        let mut chosen = idx[..room].to_vec();
        chosen.sort_unstable();
        kept = chosen.into_iter().map(|i| kept[i].clone()).collect();
    }
    if kept.is_empty() {
        let total = binomial(a, k);
        let pick = rng.random_range(0..total);
        kept.push((0..a).combinations(k).nth(pick).expect("index in range"));
    }
    let mut edges: Vec<(usize, usize)> = (0..a).tuple_combinations().collect();
    for (i, subset) in kept.iter().enumerate() {
        edges.extend(subset.iter().map(|&x| (x, a + i)));
    }
    let padding: Vec<usize> = (a + kept.len()..eta).collect();
    for &pad in &padding {
        edges.extend((0..a).map(|x| (x, pad)));
    }
    let g = Graph::from_edges(eta, edges)?;
    let meta = GraphMeta {
        family: "sanders-sub".into(),
        n: eta,
        k,
        eta: Some(eta),
        p: Some(p),
        seed: None,
        padding,
    };
    Ok((g, meta))
}

/// `n / k` cliques of size `k` in a row; node `j` of clique `i` is joined to
/// node `j` of clique `i + 1`.
pub fn clique_chain(n: usize, k: usize) -> Result<Graph> {
    if k == 0 || !n.is_multiple_of(k) || n / k < 2 {
        return domain(format!("clique_chain needs k | n and n/k >= 2, got n={n}, k={k}"));
    }
    let cliques = n / k;
    let mut edges = Vec::new();
    for c in 0..cliques {
        let base = c * k;
        edges.extend((base..base + k).tuple_combinations::<(usize, usize)>());
        if c + 1 < cliques {
            edges.extend((0..k).map(|j| (base + j, base + k + j)));
        }
    }
    Graph::from_edges(n, edges)
}

/// Harary graph `H_{k,n}`: the minimum-edge `k`-connected graph on `n` nodes.
pub fn harary(k: usize, n: usize) -> Result<Graph> {
    if k < 2 || n <= k {
        return domain(format!("harary needs n > k >= 2, got k={k}, n={n}"));
    }
    let half = k / 2;
    let mut edges: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (1..=half).map(move |d| (i, (i + d) % n)))
        .collect();
    if k % 2 == 1 {
        if n.is_multiple_of(2) {
            edges.extend((0..n / 2).map(|i| (i, i + n / 2)));
        } else {
            // Near-diameters: i -- i + (n+1)/2 for i in 0..=(n-1)/2.
            edges.extend((0..=(n - 1) / 2).map(|i| (i, (i + n.div_ceil(2)) % n)));
        }
    }
    Graph::from_edges(n, edges)
}

/// Erdos-Renyi `G(n, p)`.
pub fn gnp<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> Result<Graph> {
    if !(0.0..=1.0).contains(&p) {
        return domain(format!("edge probability {p} outside [0, 1]"));
    }
    let edges: Vec<_> = (0..n).tuple_combinations().filter(|_| rng.random_bool(p)).collect();
    Graph::from_edges(n, edges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::vertex_connectivity;
    use crate::graph::{is_cds, NodeSet};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn sanders_small_shapes() {
        let g = sanders_graph(1).unwrap();
        assert_eq!(g.n(), 4);
        assert_eq!(g.degree(2), 1);
        assert_eq!(g.degree(3), 1);
        assert_eq!(vertex_connectivity(&g).unwrap(), 1);

        let g = sanders_graph(3).unwrap();
        assert_eq!(g.n(), 26);
        assert!((6..26).all(|v| g.degree(v) == 3));
        assert_eq!(vertex_connectivity(&g).unwrap(), 3);
        assert!(sanders_graph(0).is_err());
        assert!(sanders_graph(13).is_err());
    }

    #[test]
    fn sanders_size_bounds() {
        for k in 1..=8 {
            let n = sanders_graph(k).unwrap().n();
            assert!(n >= 1 << k && n <= 1 << (2 * k), "k={k}, n={n}");
        }
    }

    #[test]
    fn sanders_cds_needs_many_clique_nodes_randomized() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for k in 2..=6 {
            let g = sanders_graph(k).unwrap();
            let a = 2 * k;
            for _ in 0..300 {
                let take_a = rng.random_range(0..=k);
                let mut members: Vec<usize> = (0..a).collect();
                for i in 0..take_a {
                    let j = rng.random_range(i..a);
                    members.swap(i, j);
                }
                members.truncate(take_a);
                members.extend((a..g.n()).filter(|_| rng.random_bool(0.5)));
                let s = NodeSet::from_members(g.n(), members).unwrap();
                assert!(!is_cds(&g, &s));
            }
        }
    }

    #[test]
    fn subsampled_has_requested_size_and_connectivity() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (g, meta) = sanders_subsampled(8, 64, &mut rng).unwrap();
        assert_eq!(g.n(), 64);
        assert_eq!(meta.k, 8);
        assert_eq!(vertex_connectivity(&g).unwrap(), 8);
        for seed in 0..5 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (g, meta) = sanders_subsampled(6, 40, &mut rng).unwrap();
            assert_eq!(g.n(), 40);
            assert_eq!(vertex_connectivity(&g).unwrap(), 6, "{meta:?}");
        }
    }

    #[test]
    fn subsampled_probability_and_domain() {
        for k in 4..=12 {
            for eta in [4 * k, 1 << k] {
                let p = sanders_keep_probability(k, eta.max(4 * k));
                assert!((0.0..=1.0).contains(&p));
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(sanders_subsampled(8, 31, &mut rng).is_err());
        assert!(sanders_subsampled(8, 257, &mut rng).is_err());
    }

    #[test]
    fn clique_chain_shape() {
        let g = clique_chain(12, 3).unwrap();
        assert_eq!(g.m(), 4 * 3 + 9);
        assert_eq!(vertex_connectivity(&g).unwrap(), 3);
        let g = clique_chain(8, 4).unwrap();
        assert_eq!(g.m(), 2 * 6 + 4);
        assert!(clique_chain(10, 3).is_err());
        assert!(clique_chain(3, 3).is_err());
    }

    #[test]
    fn harary_special_cases() {
        assert_eq!(harary(2, 9).unwrap(), cycle(9));
        assert_eq!(harary(8, 9).unwrap(), complete(9));
        assert_eq!(harary(9, 10).unwrap(), complete(10));
        assert_eq!(vertex_connectivity(&harary(4, 10).unwrap()).unwrap(), 4);
        for (k, n) in [(3, 8), (3, 9), (5, 12), (5, 13), (7, 20)] {
            assert_eq!(vertex_connectivity(&harary(k, n).unwrap()).unwrap(), k, "H({k},{n})");
        }
        assert!(harary(1, 5).is_err());
        assert!(harary(5, 5).is_err());
    }

    #[test]
    fn gnp_extremes() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(gnp(10, 1.0, &mut rng).unwrap(), complete(10));
        assert_eq!(gnp(10, 0.0, &mut rng).unwrap().m(), 0);
        assert!(gnp(10, 1.5, &mut rng).is_err());
    }
}
