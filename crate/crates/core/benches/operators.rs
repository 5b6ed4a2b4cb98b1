use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use orowan_core::exec::Execution;
use orowan_core::field::{Grid1D, ScalarField};
use orowan_core::nonlocal::lattice::{half_laplacian, Summation};
use orowan_core::particles::ddd_rhs;
use orowan_core::profiles::Profile;

fn layer_field(n: usize) -> ScalarField {
    Profile::Arctan { width: 1.0 }.sample(Grid1D::new(0.0, 40.0, n).unwrap()).unwrap()
}

fn half_laplacian_strategies(c: &mut Criterion) {
    let mut group = c.benchmark_group("half_laplacian");
    for n in [1024usize, 4096, 16384] {
        let f = layer_field(n);
        // Warm the kernel and tail caches outside the timed region.
        half_laplacian(&f, Summation::Fft);
        for (name, mode) in [
            ("direct-sequential", Summation::Direct(Execution::Sequential)),
            ("direct-parallel", Summation::Direct(Execution::Parallel)),
            ("fft", Summation::Fft),
        ] {
            if n > 4096 && name.starts_with("direct-sequential") {
                continue;
            }
            group.bench_with_input(BenchmarkId::new(name, n), &f, |b, f| b.iter(|| half_laplacian(black_box(f), mode)));
        }
    }
    group.finish();
}

fn ddd_velocity(c: &mut Criterion) {
    let mut group = c.benchmark_group("ddd_rhs");
    for n in [64usize, 512, 2048] {
        let y: Vec<f64> = (0..n).map(|i| i as f64 - 0.5 * n as f64).collect();
        group.bench_with_input(BenchmarkId::from_parameter(n), &y, |b, y| b.iter(|| ddd_rhs(black_box(y), 1.0)));
    }
    group.finish();
}

criterion_group!(benches, half_laplacian_strategies, ddd_velocity);
criterion_main!(benches);
