//! Hot-path benchmarks: walk stepping, regeneration detection, the
//! conductance recursion, and the block bootstrap.

use criterion::{black_box, criterion_group, criterion_main, Criterion, Throughput};
use gwlab_core::estimators;
use gwlab_core::regen::{detect_regenerations, BlockBuilder};
use gwlab_core::rng::Purpose;
use gwlab_core::walk::Walker;
use gwlab_core::{conductance, OffspringLaw, SeedTree, SimMode, TreeArena};
use rand::Rng;

fn leafy_mode() -> SimMode {
    SimMode::Gw(OffspringLaw::supercritical(&[(0, 0.2), (2, 0.8)]).unwrap())
}

fn bench_walk_steps(c: &mut Criterion) {
    let seeds = SeedTree::new(1);
    let mut group = c.benchmark_group("walk_steps");
    let n = 100_000u64;
    group.throughput(Throughput::Elements(n));

    group.bench_function("dary2_lambda1", |b| {
        b.iter(|| {
            let mut arena = TreeArena::dary(2, false);
            let config = SimMode::Dary(2).walk_config(1.0).unwrap();
            let mut walker = Walker::new(&mut arena, config);
            let mut rng = seeds.stream(0, Purpose::Walk, 0);
            for _ in 0..n {
                black_box(walker.step(&mut rng).unwrap());
            }
            walker.depth()
        })
    });

    group.bench_function("gw_leafy_lambda1", |b| {
        let mode = leafy_mode();
        b.iter(|| {
            let mut arena = mode.make_arena(&seeds, 0, 0, false).unwrap();
            let config = mode.walk_config(1.0).unwrap();
            let mut walker = Walker::new(&mut arena, config);
            let mut rng = seeds.stream(0, Purpose::Walk, 0);
            for _ in 0..n {
                black_box(walker.step(&mut rng).unwrap());
            }
            walker.depth()
        })
    });

    group.bench_function("gw_leafy_with_block_builder", |b| {
        let mode = leafy_mode();
        b.iter(|| {
            let mut arena = mode.make_arena(&seeds, 0, 0, false).unwrap();
            let config = mode.walk_config(1.0).unwrap();
            let mut walker = Walker::new(&mut arena, config);
            let mut rng = seeds.stream(0, Purpose::Walk, 0);
            let mut builder = BlockBuilder::new();
            for _ in 0..n {
                let out = walker.step(&mut rng).unwrap();
                builder.push(&out);
            }
            builder.finish(50).blocks.len()
        })
    });
    group.finish();
}

fn bench_regen_detection(c: &mut Criterion) {
    let seeds = SeedTree::new(2);
    let mut rng = seeds.stream(0, Purpose::Aux, 0);
    let mut depths = vec![0i64];
    for _ in 0..100_000 {
        let d = *depths.last().unwrap();
        let up = d == 0 || rng.gen::<f64>() < 0.6;
        depths.push(if up { d + 1 } else { d - 1 });
    }
    let mut group = c.benchmark_group("regen_detection");
    group.throughput(Throughput::Elements(depths.len() as u64));
    group.bench_function("streaming_100k", |b| {
        b.iter(|| detect_regenerations(black_box(&depths), 50).unwrap().confirmed.len())
    });
    group.finish();
}

fn bench_conductance(c: &mut Criterion) {
    let seeds = SeedTree::new(3);
    let mode = SimMode::Gw(OffspringLaw::supercritical(&[(1, 0.5), (2, 0.5)]).unwrap());
    let mut group = c.benchmark_group("conductance");
    group.bench_function("gw_beta_recursion_depth20", |b| {
        b.iter(|| {
            let mut arena = mode.make_arena(&seeds, 0, 0, false).unwrap();
            conductance::escape_probability_truncated(&mut arena, 0.8, 20).unwrap()
        })
    });
    group.bench_function("dary_fast_path_depth4096", |b| {
        b.iter(|| {
            let mut arena = TreeArena::dary(2, false);
            conductance::escape_probability_truncated(&mut arena, 1.0, 4096).unwrap()
        })
    });
    group.finish();
}

fn bench_bootstrap(c: &mut Criterion) {
    let seeds = SeedTree::new(4);
    let mode = SimMode::Dary(2);
    let plan = gwlab_core::driver::ReplicaPlan::new(2, 100_000, 30);
    let collected = gwlab_core::driver::collect_blocks(&mode, 1.0, &plan, &seeds).unwrap();
    let mut group = c.benchmark_group("bootstrap");
    group.bench_function("speed_ci_200_resamples", |b| {
        b.iter(|| estimators::speed_estimate(black_box(&collected.blocks), 200, &seeds, 0).unwrap())
    });
    group.finish();
}

criterion_group!(
    benches,
    bench_walk_steps,
    bench_regen_detection,
    bench_conductance,
    bench_bootstrap
);
criterion_main!(benches);
