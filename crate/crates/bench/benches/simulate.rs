use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};

use rdp_bench::sim_config;
use rdp_core::sim;

fn simulate(c: &mut Criterion) {
    let mut group = c.benchmark_group("simulate");
    group.sample_size(10);
    for n in [65_536u64, 1 << 20] {
        let cfg = sim_config(n);
        group.throughput(Throughput::Elements(n));
        group.bench_with_input(BenchmarkId::from_parameter(n), &cfg, |b, cfg| {
            b.iter(|| sim::simulate(black_box(cfg)).unwrap().empirical_distortion)
        });
    }
    group.finish();
}

criterion_group!(benches, simulate);
criterion_main!(benches);
