use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use mvc2gen_core::batch::{transform_all, transform_all_sequential};
use mvc2gen_core::synth::{crud_chain_of, random_crud_forest};
use mvc2gen_core::{transform, UmlModel};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn forests(count: usize) -> Vec<UmlModel> {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    (0..count)
        .map(|_| random_crud_forest(&mut rng, 10))
        .collect()
}

fn batch(c: &mut Criterion) {
    let mut group = c.benchmark_group("batch");
    for count in [64, 512] {
        let models = forests(count);
        group.throughput(Throughput::Elements(count as u64));
        group.bench_with_input(BenchmarkId::new("parallel", count), &models, |b, m| {
            b.iter(|| transform_all(m))
        });
        group.bench_with_input(BenchmarkId::new("sequential", count), &models, |b, m| {
            b.iter(|| transform_all_sequential(m))
        });
    }
    group.finish();
}

fn single_chain(c: &mut Criterion) {
    let mut group = c.benchmark_group("chain");
    for n in [10, 100, 500] {
        let model = crud_chain_of(n);
        group.bench_with_input(BenchmarkId::from_parameter(n), &model, |b, m| {
            b.iter(|| transform(m).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, batch, single_chain);
criterion_main!(benches);
