//! Fixtures shared by the benchmarks.

use cdspack::generators::{clique_chain, harary, sanders_graph};
use cdspack::{build_packing, BuildParams, CdsPacking, Graph};

/// `(label, graph, connectivity)` for the connectivity benchmarks.
pub fn connectivity_cases() -> Vec<(String, Graph, usize)> {
    vec![
        ("harary_8_256".into(), harary(8, 256).unwrap(), 8),
        ("harary_16_512".into(), harary(16, 512).unwrap(), 16),
        ("clique_chain_400_10".into(), clique_chain(400, 10).unwrap(), 10),
        ("sanders_5".into(), sanders_graph(5).unwrap(), 5),
    ]
}

pub fn harary_cases() -> Vec<(usize, usize)> {
    vec![(16, 256), (32, 1024)]
}

/// Packing built with default parameters and a fixed seed.
pub fn default_packing(g: &Graph, k: usize) -> CdsPacking {
    build_packing(g, k, &BuildParams { seed: 1, ..Default::default() })
        .expect("packing builds")
        .packing
}
