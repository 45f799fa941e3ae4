use criterion::{criterion_group, criterion_main, Criterion};
use foliated_core::fields::BasicFourier;
use foliated_core::flow::{flow_deterministic, flow_stochastic_endpoint};
use foliated_core::invariant::solve_invariant_density;
use foliated_core::semigroup::estimate_semigroup_fn;
use foliated_core::suite::{torus_bundle, warped_torus};
use foliated_core::{sample_brownian, AdaptedFrame, ChartPoint, IntegratorConfig, McConfig, SemigroupMode, Vec3};
use std::hint::black_box;

fn flows(c: &mut Criterion) {
    let atlas = torus_bundle(0.2);
    let r0 = AdaptedFrame::coordinate(&atlas, ChartPoint::from_slice(&[0.1, 0.2, 0.3]));
    let cfg = IntegratorConfig::default();
    c.bench_function("deterministic_flow_T1", |b| {
        b.iter(|| flow_deterministic(&atlas, &r0, &Vec3::new(0.3, 0.5, 0.8), black_box(1.0), &cfg).unwrap())
    });
    let path = sample_brownian(3, 8, 1.0, 1, 0).unwrap();
    c.bench_function("stochastic_endpoint_k8_T1", |b| {
        b.iter(|| flow_stochastic_endpoint(&atlas, &r0, black_box(&path), &cfg).unwrap())
    });
    c.bench_function("brownian_path_k8_T1", |b| {
        let mut i = 0u64;
        b.iter(|| {
            i += 1;
            sample_brownian(3, 8, 1.0, 1, black_box(i)).unwrap()
        })
    });
}

fn density(c: &mut Criterion) {
    let atlas = warped_torus();
    for n in [512, 2048] {
        c.bench_function(&format!("invariant_density_N{n}"), |b| {
            b.iter(|| solve_invariant_density(&atlas, black_box(n)).unwrap())
        });
    }
}

fn monte_carlo(c: &mut Criterion) {
    let atlas = warped_torus();
    let f = BasicFourier::cos_mode(&atlas, 1);
    let z = ChartPoint::from_slice(&[0.3, 0.1]);
    let mut group = c.benchmark_group("semigroup");
    group.sample_size(10);
    group.bench_function("full_t0.1_256_paths", |b| {
        b.iter(|| {
            estimate_semigroup_fn(&atlas, &f, &z, black_box(0.1), SemigroupMode::Full, &McConfig::new(256, 8, 1)).unwrap()
        })
    });
    group.finish();
}

criterion_group!(benches, flows, density, monte_carlo);
criterion_main!(benches);
