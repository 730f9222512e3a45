use cdspack::broadcast::spread_messages;
use cdspack::generators::{complete, harary};
use cdspack::{extract_packing, simulate_broadcast};
use cdspack_bench::default_packing;
use criterion::{criterion_group, criterion_main, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn round_trip(c: &mut Criterion) {
    let mut group = c.benchmark_group("broadcast");
    group.sample_size(10);
    for (label, g, k) in [("harary_16_256", harary(16, 256).unwrap(), 16), ("complete_64", complete(64), 63)] {
        let packing = default_packing(&g, k);
        let messages = spread_messages(g.n(), 200);
        group.bench_function(format!("simulate/{label}"), |b| {
            b.iter(|| simulate_broadcast(&g, &packing, &messages, &mut ChaCha8Rng::seed_from_u64(3)).unwrap())
        });
        let (log, _) = simulate_broadcast(&g, &packing, &messages, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        group.bench_function(format!("extract/{label}"), |b| b.iter(|| extract_packing(&log, &g).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, round_trip);
criterion_main!(benches);
