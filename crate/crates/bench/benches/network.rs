use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use netfolio::{integrated_clustering, interconnectedness_matrix, threshold_graph, watts_clustering};
use netfolio_bench::network;

fn clustering(c: &mut Criterion) {
    let mut group = c.benchmark_group("integrated_clustering");
    for n in [20, 100, 266] {
        let net = network(n, 3);
        group.bench_with_input(BenchmarkId::new("exact_sweep", n), &net, |b, net| {
            b.iter(|| integrated_clustering(black_box(net)))
        });
    }
    // One threshold graph plus naive clustering, for scale.
    let net = network(100, 3);
    group.bench_function("single_threshold_100", |b| {
        b.iter(|| watts_clustering(&threshold_graph(black_box(&net), 0.3).unwrap()))
    });
    let cvec = integrated_clustering(&net);
    group.bench_function("interconnectedness_100", |b| {
        b.iter(|| interconnectedness_matrix(black_box(&cvec)))
    });
    group.finish();
}

criterion_group!(benches, clustering);
criterion_main!(benches);
