use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use netfolio::{solve_erc, solve_gmv, solve_mdp, solve_mv, MeanEstimate, RiskModel, SolverConfig};
use netfolio_bench::covariance;

fn solvers(c: &mut Criterion) {
    let cfg = SolverConfig::default();
    let mut group = c.benchmark_group("solvers");
    for n in [10, 50, 150] {
        let risk = RiskModel::standard(&covariance(n, 3 * n, 1));
        let mu = MeanEstimate {
            mu: risk.vols.map(|v| v * 0.05),
        };
        group.bench_with_input(BenchmarkId::new("gmv", n), &risk, |b, r| {
            b.iter(|| solve_gmv(black_box(r), &cfg).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("mv_0.5", n), &risk, |b, r| {
            b.iter(|| solve_mv(black_box(r), &mu, 0.5, &cfg).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("mdp", n), &risk, |b, r| {
            b.iter(|| solve_mdp(black_box(r), &cfg).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("erc", n), &risk, |b, r| {
            b.iter(|| solve_erc(black_box(r), &cfg).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, solvers);
criterion_main!(benches);
