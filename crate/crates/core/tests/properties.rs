use cdspack::broadcast::spread_messages;
use cdspack::experiments::{isotonic_fit, wilson_interval};
use cdspack::graph::{connected_components, induced_subgraph, is_cds, is_connected, is_connected_subset};
use cdspack::packing::reduce_overlap;
use cdspack::partition::check_partition;
use cdspack::paths::max_disjoint_bounded_paths;
use cdspack::verify::brute_force_vertex_connectivity;
use cdspack::virtual_graph::{coupling_probability, project, virtual_components, VirtualNode};
use cdspack::{
    build_packing, build_partition, extract_packing, min_vertex_cut, simulate_broadcast, vertex_connectivity,
    verify_packing, BuildParams, Graph, NodeSet, ScheduleLog,
};
use num_rational::Rational64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Graph on `2..=max_n` nodes with each pair present independently.
fn graph(max_n: usize) -> impl Strategy<Value = Graph> {
    (2..=max_n).prop_flat_map(|n| {
        proptest::collection::vec(any::<bool>(), n * (n - 1) / 2).prop_map(move |bits| {
            let pairs = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v)));
            Graph::from_edges(n, pairs.zip(bits).filter(|(_, b)| *b).map(|(e, _)| e)).unwrap()
        })
    })
}

fn connected_graph(max_n: usize) -> impl Strategy<Value = Graph> {
    graph(max_n).prop_filter("connected", is_connected)
}

fn subset(n: usize, mask: u64) -> NodeSet {
    NodeSet::from_members(n, (0..n).filter(|&v| mask >> v & 1 == 1)).unwrap()
}

/// Largest set of internally disjoint `a`-`b` paths with one or two internal
/// nodes outside `a`, `b` and `forbidden`, by exhaustive search.
fn brute_force_bounded_paths(g: &Graph, a: &NodeSet, b: &NodeSet, forbidden: &NodeSet) -> usize {
    let free = |v: usize| !a.contains(v) && !b.contains(v) && !forbidden.contains(v);
    let touches = |v: usize, s: &NodeSet| g.neighbors(v).iter().any(|&u| s.contains(u));
    let mut paths: Vec<u64> = Vec::new();
    for x in (0..g.n()).filter(|&x| free(x)) {
        if touches(x, a) && touches(x, b) {
            paths.push(1 << x);
        }
        for &y in g.neighbors(x) {
            if free(y) && touches(x, a) && touches(y, b) {
                paths.push(1 << x | 1 << y);
            }
        }
    }
    fn best(paths: &[u64], used: u64) -> usize {
        match paths.split_first() {
            None => 0,
            Some((&p, rest)) => {
                let skip = best(rest, used);
                if p & used == 0 {
                    skip.max(1 + best(rest, used | p))
                } else {
                    skip
                }
            }
        }
    }
    best(&paths, 0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn connectivity_matches_exhaustive_cuts(g in graph(10)) {
        prop_assert_eq!(vertex_connectivity(&g).unwrap(), brute_force_vertex_connectivity(&g).unwrap());
    }

    #[test]
    fn witness_cut_separates(g in graph(10)) {
        let (k, cut) = min_vertex_cut(&g).unwrap();
        match cut {
            None => prop_assert!(g.is_complete()),
            Some(cut) => {
                prop_assert_eq!(cut.len(), k);
                let mut rest = g.all_nodes();
                rest.difference_with(&cut);
                prop_assert!(!is_connected_subset(&g, &rest));
            }
        }
    }

    #[test]
    fn connectivity_at_most_min_degree(g in connected_graph(12)) {
        let k = vertex_connectivity(&g).unwrap();
        prop_assert!(k <= g.min_degree().unwrap().0);
    }

    #[test]
    fn bounded_paths_are_disjoint_and_maximum(g in graph(9), a_mask in 1u64..512, b_mask in 1u64..512, f_mask in 0u64..512) {
        let n = g.n();
        let a = subset(n, a_mask);
        let mut b = subset(n, b_mask);
        b.difference_with(&a);
        let mut forbidden = subset(n, f_mask);
        forbidden.difference_with(&a);
        forbidden.difference_with(&b);
        prop_assume!(!a.is_empty() && !b.is_empty());
        let paths = max_disjoint_bounded_paths(&g, &a, &b, &forbidden, usize::MAX).unwrap();
        let mut used = NodeSet::new(n);
        for p in &paths {
            prop_assert!(a.contains(p.start) && b.contains(p.end));
            prop_assert!((1..=2).contains(&p.internals.len()));
            let mut walk = vec![p.start];
            walk.extend(&p.internals);
            walk.push(p.end);
            for w in walk.windows(2) {
                prop_assert!(g.has_edge(w[0], w[1]));
            }
            for &x in &p.internals {
                prop_assert!(!a.contains(x) && !b.contains(x) && !forbidden.contains(x));
                prop_assert!(used.insert(x), "internal node {} reused", x);
            }
        }
        prop_assert_eq!(paths.len(), brute_force_bounded_paths(&g, &a, &b, &forbidden));
    }

    #[test]
    fn virtual_components_match_projection(g in graph(10), picks in proptest::collection::vec((0usize..10, 1usize..4, 1u8..4), 0..25)) {
        let n = g.n();
        let mut vs: Vec<VirtualNode> = picks
            .into_iter()
            .filter(|&(r, _, _)| r < n)
            .map(|(r, l, t)| VirtualNode::new(r, l, t))
            .collect();
        vs.sort();
        vs.dedup();
        let projected = project(n, &vs);
        let comps = virtual_components(&g, &vs);
        prop_assert_eq!(comps.len(), connected_components(&g, &projected).len());
        for c in &comps {
            prop_assert!(is_connected_subset(&g, &project(n, c)));
        }
    }

    #[test]
    fn coupling_recovers_p(p in 0.0f64..=1.0, copies in 1usize..200) {
        let q = coupling_probability(p, copies).unwrap();
        prop_assert!((0.0..=1.0).contains(&q));
        let back = 1.0 - (1.0 - q).powi(copies as i32);
        prop_assert!((back - p).abs() < 1e-12);
    }

    #[test]
    fn packings_verify(g in connected_graph(12), seed in any::<u64>(), p in prop_oneof![Just(1.0), 0.3f64..1.0]) {
        let k = vertex_connectivity(&g).unwrap();
        prop_assume!(k >= 1);
        let out = build_packing(&g, k, &BuildParams { seed, p, ..Default::default() }).unwrap();
        let report = verify_packing(&g, &out.packing, &out.sampled);
        prop_assert_eq!(report.pass, out.valid);
        if is_connected_subset(&g, &out.sampled) {
            prop_assert!(out.valid);
            if p == 1.0 && !g.is_complete() {
                prop_assert!(out.packing.size() <= k as f64 + 1e-9);
            }
        }
    }

    #[test]
    fn partitions_are_exact(g in connected_graph(12), seed in any::<u64>(), classes in 1usize..5) {
        let k = vertex_connectivity(&g).unwrap();
        let out = build_partition(&g, k.max(1), &BuildParams { seed, classes: Some(classes), ..Default::default() }).unwrap();
        prop_assert!(check_partition(&g, &out.sets, out.count));
        prop_assert!(out.count >= 1 && out.count <= classes.max(1));
    }

    #[test]
    fn overlap_reduction_keeps_cdss(g in connected_graph(12), masks in proptest::collection::vec(1u64..4096, 1..5)) {
        let n = g.n();
        let universe = g.all_nodes();
        let sets: Vec<NodeSet> = masks.iter().map(|&m| subset(n, m)).filter(|s| is_cds(&g, s)).collect();
        prop_assume!(!sets.is_empty());
        let reduced = reduce_overlap(&g, &universe, &sets);
        prop_assert_eq!(reduced.len(), sets.len());
        for s in &reduced {
            prop_assert!(is_cds(&g, s));
        }
    }

    #[test]
    fn extraction_bounds_throughput(g in connected_graph(10), seed in any::<u64>(), messages in 1usize..20) {
        let k = vertex_connectivity(&g).unwrap();
        let out = build_packing(&g, k.max(1), &BuildParams { seed, ..Default::default() }).unwrap();
        prop_assume!(out.valid);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (log, report) = simulate_broadcast(&g, &out.packing, &spread_messages(g.n(), messages), &mut rng).unwrap();
        let parsed = ScheduleLog::from_csv(&log.to_csv().unwrap()).unwrap();
        prop_assert_eq!(&parsed.sends, &log.sends);
        prop_assert_eq!(parsed.rounds, log.rounds);
        let extracted = extract_packing(&parsed, &g).unwrap();
        let achieved = Rational64::new(report.messages as i64, report.rounds as i64);
        prop_assert!(extracted.packing.size_exact().unwrap() >= achieved);
        prop_assert!(verify_packing(&g, &extracted.packing, &g.all_nodes()).pass);
    }

    #[test]
    fn edge_list_round_trip(g in graph(15)) {
        let back = Graph::parse_edge_list(&g.to_edge_list()).unwrap();
        prop_assert_eq!(back.n(), g.n());
        prop_assert_eq!(back.edges().collect::<Vec<_>>(), g.edges().collect::<Vec<_>>());
    }

    #[test]
    fn induced_subgraph_preserves_adjacency(g in graph(12), mask in 0u64..4096) {
        let s = subset(g.n(), mask);
        let (h, map) = induced_subgraph(&g, &s).unwrap();
        prop_assert_eq!(h.n(), s.len());
        for u in 0..h.n() {
            for v in 0..h.n() {
                prop_assert_eq!(h.has_edge(u, v), g.has_edge(map[u], map[v]));
            }
        }
    }

    #[test]
    fn isotonic_fit_is_monotone_and_mean_preserving(values in proptest::collection::vec(0.0f64..1.0, 0..30)) {
        let weights: Vec<f64> = (0..values.len()).map(|i| 1.0 + (i % 3) as f64).collect();
        let fit = isotonic_fit(&values, &weights);
        prop_assert_eq!(fit.len(), values.len());
        prop_assert!(fit.windows(2).all(|w| w[0] <= w[1] + 1e-12));
        let dot = |xs: &[f64]| xs.iter().zip(&weights).map(|(x, w)| x * w).sum::<f64>();
        prop_assert!((dot(&fit) - dot(&values)).abs() < 1e-9);
    }

    #[test]
    fn wilson_interval_brackets_estimate(trials in 1usize..2000, frac in 0.0f64..=1.0) {
        let successes = (frac * trials as f64).round() as usize;
        let (lo, hi) = wilson_interval(successes, trials);
        let phat = successes as f64 / trials as f64;
        prop_assert!(0.0 <= lo && lo <= phat + 1e-12 && phat <= hi + 1e-12 && hi <= 1.0);
    }
}
