use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use dsae_bench::{short_training, workload, SIZES};
use dsae_core::dsae::train;
use dsae_core::scattering::{build_frame, gaussian_signal, scatter};
use dsae_core::spectral::magnetic_laplacian;
use dsae_core::Geometry;

fn eigendecomposition(c: &mut Criterion) {
    let mut group = c.benchmark_group("eigendecomposition");
    for n in SIZES {
        let lap = magnetic_laplacian(&workload(n), 0.1, true).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &lap, |b, lap| {
            b.iter(|| black_box(lap.decompose().unwrap()))
        });
    }
    group.finish();
}

fn scattering(c: &mut Criterion) {
    let mut group = c.benchmark_group("scattering_j10");
    for n in SIZES {
        let dec = magnetic_laplacian(&workload(n), 0.1, true).unwrap().decompose().unwrap();
        let frame = build_frame(dec, 10);
        let x = gaussian_signal(n, 1, 0).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &frame, |b, frame| {
            b.iter(|| black_box(scatter(frame, &x.view()).unwrap()))
        });
    }
    group.finish();
}

fn training(c: &mut Criterion) {
    let mut group = c.benchmark_group("train_20_epochs");
    group.sample_size(10);
    let g = workload(183);
    for geometry in [Geometry::Euclidean, Geometry::Hyperbolic] {
        let cfg = short_training(geometry);
        group.bench_function(geometry.to_string(), |b| b.iter(|| black_box(train(&g, &cfg, None).unwrap())));
    }
    group.finish();
}

criterion_group!(benches, eigendecomposition, scattering, training);
criterion_main!(benches);
