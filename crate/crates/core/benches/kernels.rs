//! Per-pixel kernels on one worker versus the default pool.
//!
//! Build with `--no-default-features` to time the sequential fallback.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use muellerkit::luchipman::{decompose_cube, DecomposeOptions};
use muellerkit::par::{current_workers, with_workers};
use muellerkit::realizability::{project_cube, scan_cube, DEFAULT_CLIP, DEFAULT_TOL_PHYS};
use muellerkit::synth::{random_physical_cube, unphysical_tile_cube};

fn pools() -> Vec<(String, Option<usize>)> {
    vec![
        ("1-worker".to_string(), Some(1)),
        (format!("default-{}", current_workers()), None),
    ]
}

fn kernels(c: &mut Criterion) {
    let cube = random_physical_cube(64, 64, vec![500.0, 600.0], 1).unwrap();
    let tile = unphysical_tile_cube(64, 64, vec![500.0, 600.0]).unwrap();
    let opts = DecomposeOptions::default();
    let n = cube.data().len() as u64;

    let mut group = c.benchmark_group("decompose_cube");
    group.throughput(Throughput::Elements(n));
    for (label, workers) in pools() {
        group.bench_with_input(BenchmarkId::from_parameter(&label), &workers, |b, &w| {
            with_workers(w, || b.iter(|| decompose_cube(black_box(&cube), &opts).unwrap()))
        });
    }
    group.finish();

    let mut group = c.benchmark_group("scan_cube");
    group.throughput(Throughput::Elements(n));
    for (label, workers) in pools() {
        group.bench_with_input(BenchmarkId::from_parameter(&label), &workers, |b, &w| {
            with_workers(w, || b.iter(|| scan_cube(black_box(&cube), DEFAULT_TOL_PHYS).unwrap()))
        });
    }
    group.finish();

    let mut group = c.benchmark_group("project_cube");
    group.throughput(Throughput::Elements(n));
    for (label, workers) in pools() {
        group.bench_with_input(BenchmarkId::from_parameter(&label), &workers, |b, &w| {
            with_workers(w, || b.iter(|| project_cube(black_box(&tile), DEFAULT_CLIP, DEFAULT_TOL_PHYS).unwrap()))
        });
    }
    group.finish();
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = kernels
}
criterion_main!(benches);
