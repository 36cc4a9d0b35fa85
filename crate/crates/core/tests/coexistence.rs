use approx::assert_relative_eq;
use proptest::prelude::*;
use semp_core::bco::DecisionInterval;
use semp_core::coexistence::*;

fn pack_params() -> impl Strategy<Value = CoexistenceParams> {
    (1u32..30, 0.01..0.1f64, 1e6..1e8f64, 0.0..2e-3f64, 0.0..0.5f64, 1e6..5e7f64).prop_map(
        |(n, on, r, c1, c2_frac, s)| {
            let rates = (0..n).map(|j| s * (1.0 + 0.1 * j as f64)).collect();
            CoexistenceParams::new(on, r, rates, c1, c2_frac * on).unwrap()
        },
    )
}

proptest! {
    #[test]
    fn cost_matches_the_throughput_formulas(p in pack_params(), z in -6.9..0.0f64) {
        let direct = cost_from_throughputs(&p, z).unwrap();
        prop_assert!((cost(&p, z) - direct).abs() <= 1e-9 * direct.abs().max(1.0));
    }

    #[test]
    fn gradient_is_increasing(p in pack_params(), a in -10.0..3.0f64, b in -10.0..3.0f64) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assert!(analytic_gradient(&p, lo) <= analytic_gradient(&p, hi));
        // Bounded between -n and 1.
        let n = p.stations() as f64;
        prop_assert!(analytic_gradient(&p, lo) > -n && analytic_gradient(&p, hi) < 1.0);
    }

    #[test]
    fn off_time_transform_round_trips(z in -10.0..2.0f64, c1 in 0.0..1e-2f64) {
        let back = toff_to_ztilde(ztilde_to_toff(z, c1), c1).unwrap();
        prop_assert!((back - z).abs() < 1e-9);
    }
}

#[test]
fn lipschitz_constant_matches_a_grid_scan() {
    let k = default_interval();
    for n in [1, 5, 10, 20] {
        let p = ParameterPack::default().params(n).unwrap();
        let grid = (0..=10_000)
            .map(|i| analytic_gradient(&p, k.lower() + k.diameter() * i as f64 / 10_000.0).abs())
            .fold(0.0, f64::max);
        assert_relative_eq!(lipschitz_on(&p, &k), grid, max_relative = 1e-12);
    }
}

#[test]
fn optimum_is_the_proportional_fair_split() {
    // At the optimum the off period is n times the effective on period.
    let k = default_interval();
    let pack = ParameterPack::default();
    for n in 1..=19 {
        let p = pack.params(n).unwrap();
        let opt = optimal_ztilde(&p, &k);
        assert!(opt.interior, "n = {n}");
        let expected = n as f64 * (p.on_time() + p.c1()) + p.c1();
        assert_relative_eq!(opt.toff, expected, max_relative = 1e-12);
        assert!(analytic_gradient(&p, opt.ztilde).abs() < 1e-12);
    }
    // n = 10 sits near half a second.
    let opt = optimal_ztilde(&pack.params(10).unwrap(), &k);
    assert!((opt.toff - 0.5).abs() < 5e-3, "{}", opt.toff);
    // Twenty stations want more than K allows.
    let opt = optimal_ztilde(&pack.params(20).unwrap(), &k);
    assert!(!opt.interior && opt.ztilde == k.upper());
}

#[test]
fn optimum_beats_every_grid_point() {
    let k = DecisionInterval::new(-6.9, 0.0).unwrap();
    for n in [1, 3, 10] {
        let p = ParameterPack::default().params(n).unwrap();
        let best = cost(&p, optimal_ztilde(&p, &k).ztilde);
        for i in 0..=2000 {
            let z = k.lower() + k.diameter() * i as f64 / 2000.0;
            assert!(cost(&p, z) >= best - 1e-12);
        }
    }
}

#[test]
fn baseline_rate_against_bianchi_enumeration() {
    // Independent oracle: enumerate how many of n stations transmit in a slot.
    let pack = ParameterPack::default();
    let mac = pack.mac();
    for n in [1u32, 2, 5, 10] {
        let tau = mac.tau;
        let mut p_k = Vec::new();
        for k in 0..=n {
            let binom: f64 = (0..k).map(|i| (n - i) as f64 / (i + 1) as f64).product();
            p_k.push(binom * tau.powi(k as i32) * (1.0 - tau).powi((n - k) as i32));
        }
        let mean_slot = p_k[0] * mac.slot_time
            + p_k[1] * mac.success_time
            + p_k[2..].iter().sum::<f64>() * mac.collision_time;
        let per_station = p_k[1] / n as f64 * mac.payload_bits / mean_slot;
        assert_relative_eq!(wifi_baseline_rate(&mac, n).unwrap(), per_station, max_relative = 1e-12);
    }
}
