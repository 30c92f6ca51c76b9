//! Core formulas against explicit-matrix computations.

use coexist_core::effect::{BlochOperator, Effect, SimpleObservable, Vec3};
use coexist_core::jointness::{decide_jm, witness_operators, JmStatus, JmVerdict, DEFAULT_DECISION_TOL};
use coexist_core::measures::distance;
use coexist_core::oracle::{bloch_matrix, brute_force_jm, effect_matrix, probability, sampled_distance, BlochState};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn ball(r: &mut ChaCha8Rng) -> Vec3 {
    loop {
        let v = Vec3::new(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0), r.random_range(-1.0..1.0));
        if v.norm() <= 1.0 {
            return v;
        }
    }
}

fn observable(r: &mut ChaCha8Rng) -> SimpleObservable {
    let a = ball(r);
    let alpha = a.norm() + r.random_range(0.0..=1.0) * (2.0 - 2.0 * a.norm());
    SimpleObservable::from_coords(alpha, a).unwrap()
}

#[test]
fn eigenvalues_agree_including_invalid_candidates() {
    let mut r = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..100_000 {
        let alpha = r.random_range(-1.0..3.0);
        let a = 1.5 * ball(&mut r);
        let op = BlochOperator::new(alpha, a);
        let m = bloch_matrix(alpha, &a);
        assert!((m.min_eigenvalue() - op.min_eigenvalue()).abs() < 1e-12);
        assert!((m.max_eigenvalue() - op.max_eigenvalue()).abs() < 1e-12);
        assert_eq!(op.is_effect(0.0), m.min_eigenvalue() >= 0.0 && m.max_eigenvalue() <= 1.0 || {
            // Exactly on the boundary the two forms may round differently.
            (m.min_eigenvalue().abs() < 1e-15) || ((m.max_eigenvalue() - 1.0).abs() < 1e-15)
        });
    }
}

#[test]
fn probabilities_match_the_trace_formula() {
    let mut r = ChaCha8Rng::seed_from_u64(22);
    for _ in 0..10_000 {
        let o = observable(&mut r);
        let state = BlochState::new(ball(&mut r)).unwrap();
        let closed = 0.5 * (o.alpha() + state.r().dot(&o.a()));
        assert!((probability(&o.plus, &state) - closed).abs() < 1e-14);
        let total = probability(&o.plus, &state) + probability(&o.minus(), &state);
        assert!((total - 1.0).abs() < 1e-14);
    }
}

#[test]
fn distance_is_the_largest_probability_gap() {
    let mut r = ChaCha8Rng::seed_from_u64(23);
    for k in 0..200 {
        let (o1, o2) = (observable(&mut r), observable(&mut r));
        let exact = distance(&o1, &o2);
        let est = sampled_distance(&o1, &o2, 10_000, k);
        assert!(est <= exact + 1e-12, "estimate {est} above {exact}");
        assert!(exact - est < 1e-3, "estimate {est} too far below {exact}");
    }
}

#[test]
fn witnesses_pass_the_matrix_test() {
    let mut r = ChaCha8Rng::seed_from_u64(24);
    let mut jm = 0;
    for _ in 0..5_000 {
        let (o1, o2) = (observable(&mut r), observable(&mut r));
        let v = decide_jm(&o1, &o2, DEFAULT_DECISION_TOL).unwrap();
        if v.status != JmStatus::JointlyMeasurable {
            continue;
        }
        jm += 1;
        let w = v.witness.unwrap();
        for op in witness_operators(&o1, &o2, w.alpha(), &w.a()) {
            assert!(bloch_matrix(op.alpha, &op.a).min_eigenvalue() >= -1e-12);
        }
        let g = v.joint(&o1, &o2).unwrap();
        let sum = g
            .components()
            .iter()
            .map(effect_matrix)
            .fold((0.0, 0.0, 0.0, 0.0), |s, m| (s.0 + m.d0, s.1 + m.d1, s.2 + m.re, s.3 + m.im));
        assert!((sum.0 - 1.0).abs() < 1e-12 && (sum.1 - 1.0).abs() < 1e-12);
        assert!(sum.2.abs() < 1e-12 && sum.3.abs() < 1e-12);
    }
    assert!(jm > 1000);
}

#[test]
fn coarse_grid_agrees_away_from_the_band() {
    let res = 32;
    let band = 3.0 / res as f64;
    let mut r = ChaCha8Rng::seed_from_u64(25);
    let mut compared = 0;
    // Long unbiased vectors spread the margins far wider than random
    // biased pairs, which mostly sit close to F = 0.
    let unbiased = |r: &mut ChaCha8Rng| {
        let v = ball(r);
        let len = r.random_range(0.5..=1.0);
        SimpleObservable::from_coords(1.0, len * v / v.norm().max(1e-9)).unwrap()
    };
    for _ in 0..300 {
        let (o1, o2) = (unbiased(&mut r), unbiased(&mut r));
        let v = decide_jm(&o1, &o2, DEFAULT_DECISION_TOL).unwrap();
        let b = brute_force_jm(&o1, &o2, res).unwrap();
        if b.status == JmStatus::JointlyMeasurable {
            // A feasible grid point is a certificate whatever the band.
            assert_ne!(v.status, JmStatus::NotJointlyMeasurable);
            let w = b.witness.unwrap();
            assert!(
                Effect::new(w.alpha(), w.a()).is_ok() && b.margin <= 2e-12,
                "grid witness must be feasible"
            );
        }
        if v.margin.abs() > band {
            compared += 1;
            assert_eq!(v.status, b.status);
        }
    }
    assert!(compared > 40, "only {compared} pairs outside the band");
}

#[test]
fn verdict_json_shape() {
    let o1 = SimpleObservable::from_coords(1.0, Vec3::new(0.5, 0.0, 0.0)).unwrap();
    let o2 = SimpleObservable::from_coords(1.0, Vec3::new(0.0, 0.5, 0.0)).unwrap();
    let v = decide_jm(&o1, &o2, DEFAULT_DECISION_TOL).unwrap();
    let json = serde_json::to_value(v).unwrap();
    assert_eq!(json["status"], "JointlyMeasurable");
    assert!(json["margin"].as_f64().unwrap() < 0.0);
    assert!(json["witness"]["alpha"].is_number());
    assert_eq!(json["witness"]["a"].as_array().unwrap().len(), 3);
    let back: JmVerdict = serde_json::from_value(json).unwrap();
    assert_eq!(back, v);

    let sharp = |a: Vec3| SimpleObservable::from_coords(1.0, a).unwrap();
    let v = decide_jm(&sharp(Vec3::x()), &sharp(Vec3::y()), DEFAULT_DECISION_TOL).unwrap();
    let json = serde_json::to_value(v).unwrap();
    assert_eq!(json["status"], "NotJointlyMeasurable");
    assert!(json["witness"].is_null());
}
