use std::f64::consts::FRAC_PI_2;

use clairaut_core::{
    connect_geodesic, planted_tree, shoot, solve_fermat, ConnectOptions, FermatOptions, ProfileSurface,
    SurfacePoint, WeightTriple, DEFAULT_TOL,
};
use criterion::{black_box, criterion_group, criterion_main, Criterion};

fn bench_shoot(c: &mut Criterion) {
    let sphere = ProfileSurface::sphere(1.0).unwrap();
    let catenoid = ProfileSurface::catenoid(1.0).unwrap();
    let p = SurfacePoint::new(1.2, 0.0);
    c.bench_function("shoot sphere L=2", |b| {
        b.iter(|| shoot(&sphere, black_box(p), 0.7, 2.0, DEFAULT_TOL).unwrap())
    });
    c.bench_function("shoot catenoid L=2", |b| {
        b.iter(|| shoot(&catenoid, black_box(SurfacePoint::new(0.3, 0.0)), 0.7, 2.0, DEFAULT_TOL).unwrap())
    });
}

fn bench_connect(c: &mut Criterion) {
    let sphere = ProfileSurface::sphere(1.0).unwrap();
    let opts = ConnectOptions::default();
    let (a, b) = (SurfacePoint::new(1.1, 0.0), SurfacePoint::new(FRAC_PI_2 + 0.4, 1.3));
    c.bench_function("connect sphere", |bch| {
        bch.iter(|| connect_geodesic(&sphere, black_box(a), black_box(b), &opts).unwrap())
    });
}

fn bench_fermat(c: &mut Criterion) {
    let s = ProfileSurface::paraboloid(0.5).unwrap();
    let w = WeightTriple::new(2.0, 3.0, 4.0).unwrap();
    let a0 = SurfacePoint::new(1.0, 0.0);
    let pts = planted_tree(&s, a0, &w, 0.3, [0.3, 0.4, 0.5], DEFAULT_TOL)
        .unwrap()
        .map(|p| p.end);
    let opts = FermatOptions::default();
    let mut group = c.benchmark_group("fermat");
    group.sample_size(10);
    group.bench_function("solve paraboloid planted tree", |b| {
        b.iter(|| solve_fermat(&s, black_box(&pts), &w, &opts).unwrap())
    });
    group.finish();
}

criterion_group!(benches, bench_shoot, bench_connect, bench_fermat);
criterion_main!(benches);
