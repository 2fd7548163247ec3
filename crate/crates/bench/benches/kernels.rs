use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use gibbs_bench::{area, poisson_fixture, strauss};
use gibbs_core::estimator::pl_objective;
use gibbs_core::models::{disc_union_area, hamiltonian, local_energy, Summary};
use gibbs_core::sampler::{run_chain, SamplerConfig};

fn energies(c: &mut Criterion) {
    let mut g = c.benchmark_group("hamiltonian");
    for n in [4.0, 8.0, 16.0] {
        let (w, cfg) = poisson_fixture(n, 0.74, 1);
        g.bench_with_input(BenchmarkId::new("strauss", n), &cfg, |b, cfg| {
            b.iter(|| hamiltonian(&strauss(), black_box(cfg), &w))
        });
        g.bench_with_input(BenchmarkId::new("area", n), &cfg, |b, cfg| {
            b.iter(|| hamiltonian(&area(), black_box(cfg), &w))
        });
    }
    g.finish();

    let (_, cfg) = poisson_fixture(8.0, 0.74, 2);
    let m = strauss();
    c.bench_function("local_energy/strauss", |b| b.iter(|| local_energy(&m, black_box(&[0.1, 0.2]), &cfg)));
    let s = Summary::of(&m, &cfg, 0.5);
    let other = m.with_param("beta", 1.3).unwrap();
    c.bench_function("summary_energy/strauss", |b| b.iter(|| s.energy(black_box(&other))));
}

fn geometry(c: &mut Criterion) {
    let (w, cfg) = poisson_fixture(1.0, 2.5, 3);
    let pts = cfg.points().to_vec();
    c.bench_function("disc_union_area/10", |b| b.iter(|| disc_union_area(black_box(&pts), 0.3, &w)));
}

fn sampler(c: &mut Criterion) {
    let w = gibbs_core::Window::centered(4.0, 2).unwrap();
    let cfg = SamplerConfig {
        sweeps: 50,
        burn_in: 10,
        thin: 10,
        ..SamplerConfig::default()
    };
    let m = strauss();
    let mut g = c.benchmark_group("sampler");
    g.sample_size(10);
    g.bench_function("strauss_50_sweeps", |b| b.iter(|| run_chain(&m, &w, black_box(&cfg)).unwrap()));
    g.finish();
}

fn pseudolikelihood(c: &mut Criterion) {
    let (w, cfg) = poisson_fixture(4.0, 0.74, 4);
    let m = strauss();
    let mut g = c.benchmark_group("pl_objective");
    g.sample_size(20);
    for grid in [50, 100] {
        g.bench_with_input(BenchmarkId::from_parameter(grid), &grid, |b, &k| {
            b.iter(|| pl_objective(&m, black_box(&cfg), &w, k))
        });
    }
    g.finish();
}

criterion_group!(benches, energies, geometry, sampler, pseudolikelihood);
criterion_main!(benches);
