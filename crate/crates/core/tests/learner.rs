use std::collections::HashSet;

use proptest::prelude::*;
use semp_core::bco::{
    DecisionInterval, ExplorationSchedule, Learner, LearnerConfig, StepSizeSchedule, Truncation,
};

fn config(lo: f64, width: f64, omega_frac: f64, p: f64, seed: u64) -> LearnerConfig {
    let interval = DecisionInterval::new(lo, lo + width).unwrap();
    LearnerConfig {
        exploration: ExplorationSchedule::power(omega_frac * width / 2.0, p),
        step_size: StepSizeSchedule::power(0.5, 0.5),
        seed,
        ..LearnerConfig::new(interval)
    }
}

proptest! {
    #[test]
    fn queries_and_centers_stay_feasible(
        lo in -20.0..5.0f64,
        width in 0.1..10.0f64,
        omega_frac in 0.01..0.99f64,
        p in 0.0..1.0f64,
        curvature in 0.0..3.0f64,
        target in -30.0..30.0f64,
        seed in any::<u64>(),
    ) {
        let cfg = config(lo, width, omega_frac, p, seed);
        let k = cfg.interval;
        let mut learner = Learner::new(cfg).unwrap();
        for _ in 0..60 {
            let y = learner.center();
            let delta = learner.delta();
            prop_assert!(y >= k.lower() + delta - 1e-12 && y <= k.upper() - delta + 1e-12);
            let mut points = Vec::new();
            let report = learner
                .step(|_, x| {
                    points.push(x);
                    curvature * (x - target).powi(2) + x.sin()
                })
                .unwrap();
            prop_assert_eq!(points.len(), 2);
            for &x in &points {
                prop_assert!(k.contains(x), "query {} outside {:?}", x, k);
            }
            // The pair is symmetric about the center.
            prop_assert!((points[0] + points[1] - 2.0 * y).abs() <= 1e-9 * (1.0 + y.abs()));
            prop_assert_eq!(report.center, y);
        }
    }

    #[test]
    fn affine_losses_are_estimated_exactly(
        slope in -50.0..50.0f64,
        intercept in -10.0..10.0f64,
        seed in any::<u64>(),
    ) {
        // A two-point difference of an affine loss is its slope, whatever the sign.
        let mut cfg = config(-3.0, 6.0, 0.5, 0.75, seed);
        cfg.truncation = Truncation::Off;
        let mut learner = Learner::new(cfg).unwrap();
        for _ in 0..20 {
            let r = learner.step(|_, x| slope * x + intercept).unwrap();
            prop_assert!((r.raw_gradient - slope).abs() <= 1e-9 * (1.0 + slope.abs()));
        }
    }

    #[test]
    fn seed_fixes_the_trajectory(seed in any::<u64>()) {
        let run = |s| {
            let mut l = Learner::new(config(0.0, 4.0, 0.5, 0.75, s)).unwrap();
            (0..30).map(|_| l.step(|_, x| (x - 1.3).abs()).unwrap().next_center).collect::<Vec<_>>()
        };
        prop_assert_eq!(run(seed), run(seed));
    }
}

#[test]
fn constant_mode_freezes_both_schedules() {
    let k = DecisionInterval::new(-1.0, 1.0).unwrap();
    let mut learner = Learner::new(LearnerConfig::constant(k, 0.05, 0.2)).unwrap();
    for _ in 0..25 {
        let r = learner.step(|_, x| x * x).unwrap();
        assert_eq!(r.eta, 0.05);
        assert_eq!(r.delta, 0.2);
        assert!(!r.truncated);
    }
}

#[test]
fn signs_are_balanced() {
    let mut learner = Learner::new(config(0.0, 1.0, 0.2, 0.0, 99)).unwrap();
    let mut plus = 0;
    let mut seen = HashSet::new();
    for _ in 0..4000 {
        let r = learner.step(|_, x| x).unwrap();
        seen.insert(r.sign);
        plus += usize::from(r.sign.value() > 0.0);
    }
    assert_eq!(seen.len(), 2);
    // Four standard deviations of a fair coin over 4000 flips.
    assert!((plus as f64 - 2000.0).abs() < 4.0 * 1000f64.sqrt(), "{plus}");
}

#[test]
fn descends_a_quadratic() {
    let mut learner = Learner::new(config(-5.0, 10.0, 0.1, 0.75, 3)).unwrap();
    for _ in 0..300 {
        learner.step(|_, x| (x - 1.7).powi(2)).unwrap();
    }
    assert!((learner.center() - 1.7).abs() < 1e-2, "{}", learner.center());
}
