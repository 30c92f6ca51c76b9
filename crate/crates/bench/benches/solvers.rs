use std::hint::black_box;

use coexist_core::approximation::{min_d2_given_d1, SolverOptions, TargetPair};
use coexist_core::jointness::{decide_jm, DEFAULT_DECISION_TOL};
use coexist_core::oracle::brute_force_jm;
use coexist_core::{SimpleObservable, Vec3};
use criterion::{criterion_group, criterion_main, Criterion};

fn pairs() -> Vec<(&'static str, SimpleObservable, SimpleObservable)> {
    let o = |alpha, x, y, z| SimpleObservable::from_coords(alpha, Vec3::new(x, y, z)).unwrap();
    vec![
        ("unbiased_jm", o(1.0, 0.5, 0.0, 0.0), o(1.0, 0.0, 0.5, 0.0)),
        ("unbiased_not_jm", o(1.0, 0.9, 0.0, 0.0), o(1.0, 0.0, 0.9, 0.0)),
        ("biased", o(0.8, 0.4, 0.2, 0.1), o(1.3, -0.1, 0.5, 0.3)),
    ]
}

fn decide(c: &mut Criterion) {
    let mut g = c.benchmark_group("decide_jm");
    for (name, o1, o2) in pairs() {
        g.bench_function(name, |b| b.iter(|| decide_jm(black_box(&o1), black_box(&o2), DEFAULT_DECISION_TOL)));
    }
    g.finish();
}

fn oracle(c: &mut Criterion) {
    let mut g = c.benchmark_group("brute_force_jm");
    g.sample_size(10);
    for (name, o1, o2) in pairs() {
        g.bench_function(name, |b| b.iter(|| brute_force_jm(black_box(&o1), black_box(&o2), 32)));
    }
    g.finish();
}

fn boundary(c: &mut Criterion) {
    let mut g = c.benchmark_group("min_d2_given_d1");
    g.sample_size(20);
    let opts = SolverOptions::default();
    for theta in [0.5, std::f64::consts::FRAC_PI_2] {
        let t = TargetPair::symmetric(theta).unwrap();
        g.bench_function(format!("theta_{theta:.3}"), |b| {
            b.iter(|| min_d2_given_d1(black_box(&t), black_box(0.1), &opts))
        });
    }
    g.finish();
}

criterion_group!(benches, decide, oracle, boundary);
criterion_main!(benches);
