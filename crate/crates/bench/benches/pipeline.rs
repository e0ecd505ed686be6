//! Benchmarks for the hot paths: forward kinematics, the Jacobian and
//! manipulability, voxel sweeps, and the annealing sampler.

use std::f64::consts::PI;

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use std::hint::black_box;

use handq_core::catalog::{build_catalog, HandParameters};
use handq_core::kinematics::{
    forward_kinematics_unchecked, global_manipulability, manipulability, position_jacobian,
};
use handq_core::metrics::evaluate_catalog;
use handq_core::qubo::{build_qubo, PenaltyConfig, VariableLayout};
use handq_core::solver::{exhaustive_feasible_min, simulated_anneal, SaParams};
use handq_core::workspace::{reachable_voxels, sample_joint_grid};

fn bench_kinematics(c: &mut Criterion) {
    let cat = build_catalog(&HandParameters::default()).unwrap();
    let thumb = cat.get("t1").unwrap();
    let q = [0.3, -0.4, 0.1, -0.2, -0.5];

    c.bench_function("fk_thumb", |b| {
        b.iter(|| forward_kinematics_unchecked(&thumb.chain, black_box(&q)))
    });
    c.bench_function("jacobian_thumb", |b| {
        b.iter(|| position_jacobian(&thumb.chain, black_box(&q)).unwrap())
    });
    c.bench_function("manipulability_thumb", |b| {
        b.iter(|| manipulability(&thumb.chain, black_box(&q)).unwrap())
    });
}

fn bench_sweeps(c: &mut Criterion) {
    let cat = build_catalog(&HandParameters::default()).unwrap();
    let index = cat.get("i1").unwrap();
    let grid = sample_joint_grid(index.chain.joint_limits(), PI / 12.0).unwrap();

    c.bench_function("global_manipulability_i1_pi12", |b| {
        b.iter(|| global_manipulability(&index.chain, black_box(&grid)).unwrap())
    });
    c.bench_function("reachable_voxels_i1_pi12", |b| {
        b.iter(|| reachable_voxels(&index.chain, black_box(&grid), 0.05).unwrap())
    });
}

fn bench_solver(c: &mut Criterion) {
    let cat = build_catalog(&HandParameters::default()).unwrap();
    let table = evaluate_catalog(&cat, PI / 12.0, 0.05, None).unwrap();
    let q = build_qubo(&table, &PenaltyConfig::default(), &VariableLayout::standard()).unwrap();

    c.bench_function("oracle_enumeration", |b| {
        b.iter(|| exhaustive_feasible_min(black_box(&q)).unwrap())
    });
    c.bench_function("sa_100_reads", |b| {
        let params = SaParams {
            num_reads: 100,
            seed: 1,
            ..SaParams::default()
        };
        b.iter_batched(
            || params,
            |p| simulated_anneal(black_box(&q), &p).unwrap(),
            BatchSize::SmallInput,
        )
    });
}

criterion_group!(benches, bench_kinematics, bench_sweeps, bench_solver);
criterion_main!(benches);
