use std::sync::Arc;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use semp_core::adversary::*;
use semp_core::bco::{DecisionInterval, Learner, LearnerConfig};

fn grid_min(f: impl Fn(f64) -> f64, k: &DecisionInterval, points: usize) -> f64 {
    (0..points)
        .map(|i| f(k.lower() + k.diameter() * i as f64 / (points - 1) as f64))
        .fold(f64::INFINITY, f64::min)
}

proptest! {
    #[test]
    fn hindsight_optimum_matches_grid(
        centers in prop::collection::vec(-3.0..3.0f64, 1..4),
        switch in 2u64..40,
    ) {
        let k = DecisionInterval::new(-2.0, 2.0).unwrap();
        let pieces: Vec<LossRef> = centers
            .iter()
            .map(|&c| Arc::new(Quadratic::new(1.0, c, 0.0, &k)) as LossRef)
            .collect();
        let starts = (1..pieces.len() as u64).map(|i| i * switch).collect();
        let horizon = switch * pieces.len() as u64;
        let seq = AdversarySequence::piecewise(pieces, starts, horizon).unwrap();
        let best = best_fixed_point(&seq, 1, horizon, &k).unwrap();
        let oracle = grid_min(|x| seq.cumulative(1, horizon, x).unwrap(), &k, 20_001);
        prop_assert!(best.total_cost <= oracle + 1e-9);
        prop_assert!(oracle - best.total_cost < 1e-4 * horizon as f64);
    }
}

#[test]
fn total_deviation_matches_brute_force() {
    let k = DecisionInterval::new(0.0, 1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let losses: Vec<LossRef> = (0..40)
        .map(|_| Arc::new(Affine { slope: rng.random_range(-1.0..1.0), intercept: rng.random_range(-1.0..1.0) }) as LossRef)
        .collect();
    let seq = AdversarySequence::custom(losses.clone());
    // Affine differences peak at an endpoint.
    let alpha = |a: &LossRef, b: &LossRef| (a.value(0.0) - b.value(0.0)).abs().max((a.value(1.0) - b.value(1.0)).abs());
    for (s, r) in [(1, 39), (5, 17), (3, 3)] {
        let expected: f64 = ((s - 1) / 2..=(r - 1) / 2)
            .map(|k| alpha(&losses[2 * k as usize], &losses[2 * k as usize + 1]).powi(2))
            .sum();
        let got = total_deviation(&seq, s, r, &k, 101).unwrap();
        assert!((got - expected).abs() < 1e-12, "[{s},{r}] {got} vs {expected}");
    }
}

#[test]
fn fixed_loss_regret_respects_the_bound() {
    let k = DecisionInterval::new(-1.0, 1.0).unwrap();
    let loss: LossRef = Arc::new(Quadratic::new(2.0, 0.4, 1.0, &k));
    let g = loss.lipschitz();
    let rounds = 400u64;
    let seq = Arc::new(AdversarySequence::fixed(loss, rounds));
    let (eta, delta) = (0.05, 0.1);
    let regrets: Vec<f64> = (0..25)
        .map(|seed| {
            let mut cfg = LearnerConfig::constant(k, eta, delta);
            cfg.seed = seed;
            let mut learner = Learner::new(cfg).unwrap();
            let mut ledger = RegretLedger::new(seq.clone());
            for _ in 0..rounds {
                let q = learner.next_query().unwrap();
                let c = ledger.play(q.round, q.point).unwrap();
                learner.observe(c).unwrap();
            }
            ledger.regret(1, rounds - 1, &k).unwrap()
        })
        .collect();
    let mean = regrets.iter().sum::<f64>() / regrets.len() as f64;
    let bound = Theorem1 {
        diameter: k.diameter(),
        lipschitz: g,
        eta,
        delta,
        span: (rounds - 2) as f64,
        total_deviation: 0.0,
    }
    .bound()
    .unwrap();
    assert!(mean <= bound, "{mean} > {bound}");
    assert!(mean >= 0.0);
}

#[test]
fn deviation_term_at_switching_parameters() {
    // η L / (4δ²) with η = G/(D√T), δ = C lnT/T and L = 2NC² works out to
    // G N T^{3/2} / (2 D ln²T).
    let (t, d, g, c, n) = (10_000.0f64, 2.0, 3.0, 1.5, 4u32);
    let cb = corollary_bound(Corollary::SwitchingTotal { switches: n }, t, d, g, c).unwrap();
    assert!((cb.eta - g / (d * t.sqrt())).abs() < 1e-15);
    assert!((cb.delta - c * t.ln() / t).abs() < 1e-15);
    let l = 2.0 * n as f64 * c * c;
    let full = Theorem1 { diameter: d, lipschitz: g, eta: cb.eta, delta: cb.delta, span: t, total_deviation: l }
        .bound()
        .unwrap();
    let base = Theorem1 { total_deviation: 0.0, ..Theorem1 { diameter: d, lipschitz: g, eta: cb.eta, delta: cb.delta, span: t, total_deviation: l } }
        .bound()
        .unwrap();
    let expected = g * n as f64 * t.powf(1.5) / (2.0 * d * t.ln().powi(2));
    assert!(((full - base) - expected).abs() < 1e-9 * expected);
}
