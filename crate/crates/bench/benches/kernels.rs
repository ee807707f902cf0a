use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use spca_core::{
    fidelity, fit_spca, pair_weights, pca_basis, procrustes_polar, DataMatrix, SampleWeights,
    SelfPacedConfig,
};

fn random_data(d: usize, n: usize, seed: u64) -> DataMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    DataMatrix::new(DMatrix::from_fn(d, n, |_, _| rng.gen_range(-1.0..1.0))).unwrap()
}

fn bench_fidelity(c: &mut Criterion) {
    let mut group = c.benchmark_group("fidelity");
    for &n in &[64usize, 256] {
        let x = random_data(100, n, 1);
        let u = pca_basis(&x, 10).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| fidelity(&x, &u, 0.5).unwrap())
        });
    }
    group.finish();
}

fn bench_pair_weights(c: &mut Criterion) {
    let mut group = c.benchmark_group("pair_weights");
    for &n in &[64usize, 256] {
        let x = random_data(100, n, 2);
        let u = pca_basis(&x, 10).unwrap();
        let w = SampleWeights::ones(n);
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| pair_weights(&x, &u, &w, 0.5, 1e-8).unwrap())
        });
    }
    group.finish();
}

fn bench_procrustes(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let h = DMatrix::from_fn(200, 20, |_, _| rng.gen_range(-1.0..1.0));
    c.bench_function("procrustes_polar_200x20", |b| {
        b.iter(|| procrustes_polar(&h).unwrap())
    });
}

fn bench_fit(c: &mut Criterion) {
    let x = random_data(64, 80, 4);
    let cfg = SelfPacedConfig {
        k: 8,
        p: 0.5,
        outer_iters: 5,
        ..Default::default()
    };
    c.bench_function("fit_spca_64x80_k8", |b| b.iter(|| fit_spca(&x, &cfg).unwrap()));
}

criterion_group!(benches, bench_fidelity, bench_pair_weights, bench_procrustes, bench_fit);
criterion_main!(benches);
