use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use snpmrf::{
    expansion_move, message_update, run_bp, run_expansion, run_trws, GridEnergy, LabelSet,
    Schedule, Smoothness, SolverConfig,
};
use snpmrf_bench::{grid_network, noisy_model};
use std::hint::black_box;

fn maxflow(c: &mut Criterion) {
    c.bench_function("maxflow 64x64 grid", |b| {
        b.iter_batched(
            || grid_network(64, 64, 7),
            |mut net| net.min_cut().flow_value,
            BatchSize::SmallInput,
        )
    });
}

fn expansion(c: &mut Criterion) {
    let (model, init) = noisy_model(64, 0.5, 4, 1);
    c.bench_function("expansion move 64x64, 64 labels", |b| {
        b.iter(|| expansion_move(&model, &init, black_box(32)).1)
    });
    let cfg = SolverConfig::moves().with_max_cycles(2);
    c.bench_function("expansion 2 cycles 64x64, 64 labels", |b| {
        b.iter(|| run_expansion(&model, &init, &cfg).1.final_energy())
    });
}

fn distance_transform(c: &mut Criterion) {
    let labels = LabelSet::full();
    let h: Vec<i64> = (0..256).map(|i| (i * 7919 % 1000) as i64).collect();
    for k in [1, 2] {
        let s = Smoothness::new(5, k, 5).unwrap();
        c.bench_function(&format!("message update 256 labels k={k}"), |b| {
            b.iter(|| message_update(black_box(&h), &[], &labels, &s).unwrap())
        });
    }
}

fn message_passing(c: &mut Criterion) {
    let (model, init) = noisy_model(48, 0.5, 4, 2);
    let cfg = SolverConfig::message_passing().with_max_cycles(2);
    let mut group = c.benchmark_group(format!("2 passes 48x48, {} labels", model.label_count()));
    group.sample_size(20);
    group.bench_function("bp-s", |b| {
        b.iter(|| {
            run_bp(&model, &init, &cfg, Schedule::Sequential)
                .1
                .final_energy()
        })
    });
    group.bench_function("bp-m", |b| {
        b.iter(|| {
            run_bp(&model, &init, &cfg, Schedule::Synchronous)
                .1
                .final_energy()
        })
    });
    group.bench_function("trw-s", |b| {
        b.iter(|| run_trws(&model, &init, &cfg).1.final_energy())
    });
    group.finish();
}

criterion_group!(
    benches,
    maxflow,
    expansion,
    distance_transform,
    message_passing
);
criterion_main!(benches);
