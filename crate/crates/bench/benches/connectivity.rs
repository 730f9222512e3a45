use cdspack::vertex_connectivity;
use cdspack_bench::connectivity_cases;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn exact_connectivity(c: &mut Criterion) {
    let mut group = c.benchmark_group("vertex_connectivity");
    group.sample_size(10);
    for (label, g, k) in connectivity_cases() {
        group.bench_with_input(BenchmarkId::from_parameter(label), &g, |b, g| {
            b.iter(|| assert_eq!(vertex_connectivity(g).unwrap(), k))
        });
    }
    group.finish();
}

criterion_group!(benches, exact_connectivity);
criterion_main!(benches);
