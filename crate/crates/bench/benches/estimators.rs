use criterion::{criterion_group, criterion_main, Criterion};
use gmtjet_bench::fixture;
use gmtjet_core::density::lower_density;
use gmtjet_core::jet::{estimate_tangent_plane, iterated_jet_fit};
use gmtjet_core::Config;

fn densities(c: &mut Criterion) {
    let cfg = Config::default();
    let mut g = c.benchmark_group("lower_density");
    for name in ["circle", "sphere", "a_alpha_gamma"] {
        let f = fixture(name);
        let a = f.truth.points[0].vector();
        g.bench_function(name, |b| b.iter(|| lower_density(&f.oracle, &a, &cfg.schedule, &cfg)));
    }
    g.finish();
}

fn tangent(c: &mut Criterion) {
    let cfg = Config::default();
    let f = fixture("circle");
    let a = f.truth.points[0].vector();
    c.bench_function("tangent_plane/circle", |b| b.iter(|| estimate_tangent_plane(&f.oracle, &a, &cfg.schedule, &cfg).unwrap()));
}

fn jets(c: &mut Criterion) {
    let cfg = Config::default();
    let mut g = c.benchmark_group("iterated_jet_fit");
    g.sample_size(10);
    for (name, k) in [("parabola_touch", 2), ("graph_poly", 3)] {
        let f = fixture(name);
        let a = f.truth.points[0].vector();
        g.bench_function(format!("{name}/k={k}"), |b| b.iter(|| iterated_jet_fit(&f.oracle, &a, k, 0.0, &cfg.schedule, &cfg).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, densities, tangent, jets);
criterion_main!(benches);
