use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use tdlc_core::boolalg::parse_clopen;
use tdlc_core::boundary::{goodshrink_construct, nub_window};
use tdlc_core::dynamics::proximality_sample;
use tdlc_core::presets;
use tdlc_core::specfile::GroupSpec;

fn modes() -> Vec<(&'static str, bool)> {
    let mut m = vec![("sequential", false)];
    if tdlc_core::par::available() {
        m.push(("parallel", true));
    }
    m
}

fn bench_nub(c: &mut Criterion) {
    let spec = GroupSpec::parse(presets::U_S3).unwrap();
    let u = spec.universal().unwrap();
    let g = spec.element("t0").unwrap();
    let beta = parse_clopen(spec.shape, "{02}").unwrap();
    let mut group = c.benchmark_group("nub_window_depth7");
    group.sample_size(10);
    for (name, parallel) in modes() {
        group.bench_with_input(BenchmarkId::from_parameter(name), &parallel, |b, &p| {
            b.iter(|| black_box(nub_window(&u, g, &beta, 3, 7, p).unwrap()))
        });
    }
    group.finish();
}

fn bench_goodshrink(c: &mut Criterion) {
    let spec = GroupSpec::parse(presets::U_S3).unwrap();
    let u = spec.universal().unwrap();
    let g = spec.element("t0").unwrap();
    let alpha = parse_clopen(spec.shape, "{0}").unwrap();
    let mut group = c.benchmark_group("goodshrink_depth6");
    for (name, parallel) in modes() {
        group.bench_with_input(BenchmarkId::from_parameter(name), &parallel, |b, &p| {
            b.iter(|| black_box(goodshrink_construct(&u, g, &alpha, 6, p).unwrap()))
        });
    }
    group.finish();
}

fn bench_compression(c: &mut Criterion) {
    let spec = GroupSpec::parse(presets::U_S3).unwrap();
    let target = parse_clopen(spec.shape, "{01}").unwrap();
    let mut group = c.benchmark_group("pair_compression_100");
    for (name, parallel) in modes() {
        let ctx = spec.context(6, 8).unwrap().with_parallel(parallel);
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| black_box(proximality_sample(&ctx, 6, 100, 9, &target).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, bench_nub, bench_goodshrink, bench_compression);
criterion_main!(benches);
