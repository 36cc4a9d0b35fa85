//! End-to-end acceptance checks. Runs as a plain binary so every check
//! prints one PASS/FAIL line regardless of output capture.

use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use semp_core::adversary::{instantaneous_deviation, Affine, LossRef, Quadratic, Shifted};
use semp_core::bco::{gradient_estimate, DecisionInterval, Sign};
use semp_core::coexistence::{
    self, analytic_gradient, cost, optimal_ztilde, throughputs_at, CoexistenceLoss, CoexistenceParams,
    ParameterPack,
};
use semp_core::experiments::{
    regret_report, run_plan, staircase, EnvironmentSpec, ExperimentPlan, Scenario, TrajectoryRecord,
};
use semp_core::packet_sim;
use semp_core::stats::Summary;

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(id: u32, name: &str, limit: Duration, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let out = f();
    let elapsed = start.elapsed();
    let in_time = elapsed <= limit;
    let pass = out.pass && in_time;
    println!(
        "criterion {id} {} {name}: {} [{:.1}s of {}s{}]",
        if pass { "PASS" } else { "FAIL" },
        out.detail,
        elapsed.as_secs_f64(),
        limit.as_secs(),
        if in_time { "" } else { ", too slow" }
    );
    pass
}

fn random_interval(rng: &mut ChaCha8Rng) -> DecisionInterval {
    let lo = rng.random_range(-10.0..0.0);
    DecisionInterval::new(lo, lo + rng.random_range(0.5..10.0)).unwrap()
}

fn random_params(rng: &mut ChaCha8Rng) -> CoexistenceParams {
    let n: u32 = rng.random_range(1..=30);
    let on_time = rng.random_range(0.01..0.1);
    let rates = (0..n).map(|_| rng.random_range(1e6..60e6)).collect();
    CoexistenceParams::new(
        on_time,
        rng.random_range(10e6..150e6),
        rates,
        rng.random_range(0.0..2e-3),
        rng.random_range(0.0..on_time / 2.0),
    )
    .unwrap()
}

fn random_loss(rng: &mut ChaCha8Rng, k: &DecisionInterval) -> LossRef {
    let span = k.diameter();
    match rng.random_range(0..3) {
        0 => Arc::new(Quadratic::new(
            rng.random_range(0.0..5.0),
            k.lower() + rng.random_range(-0.5..1.5) * span,
            rng.random_range(-3.0..3.0),
            k,
        )),
        1 => Arc::new(Affine {
            slope: rng.random_range(-4.0..4.0),
            intercept: rng.random_range(-3.0..3.0),
        }),
        _ => Arc::new(CoexistenceLoss::new(random_params(rng), k)),
    }
}

/// ε-averaged estimate against the central difference of the pair
/// average, and the deviation-inflated Lipschitz bound on single estimates.
fn estimator_identities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst_identity: f64 = 0.0;
    let mut bound_violations = 0;
    let mut worst_ratio: f64 = 0.0;
    for _ in 0..1000 {
        let k = random_interval(&mut rng);
        let f = random_loss(&mut rng, &k);
        let g: LossRef = if rng.random_bool(0.3) {
            Arc::new(Shifted {
                base: f.clone(),
                shift: rng.random_range(-1.0..1.0),
            })
        } else {
            random_loss(&mut rng, &k)
        };
        let delta = k.diameter() * 10f64.powf(rng.random_range(-4.0..(0.49f64).log10()));
        let y = rng.random_range(k.lower() + delta..=k.upper() - delta);

        let (fp, fm, gp, gm) = (f.value(y + delta), f.value(y - delta), g.value(y + delta), g.value(y - delta));
        let plus = gradient_estimate(fp, gm, Sign::Plus, delta).unwrap();
        let minus = gradient_estimate(fm, gp, Sign::Minus, delta).unwrap();
        let central = (0.5 * (fp + gp) - 0.5 * (fm + gm)) / (2.0 * delta);
        let averaged = 0.5 * (plus + minus);
        // Rounding error scales with the operands, |f|/δ, not with the result.
        let scale = [fp, fm, gp, gm].iter().fold(1.0f64, |m, v| m.max(v.abs())) / delta;
        worst_identity = worst_identity.max((averaged - central).abs() / scale);

        let lipschitz = f.lipschitz().max(g.lipschitz());
        let alpha = instantaneous_deviation(f.as_ref(), g.as_ref(), &k, 10_000).unwrap();
        let bound = lipschitz + alpha / (2.0 * delta);
        for est in [plus, minus] {
            worst_ratio = worst_ratio.max(est.abs() / bound);
            if est.abs() > bound * (1.0 + 1e-12) {
                bound_violations += 1;
            }
        }
    }
    Outcome {
        pass: worst_identity <= 1e-12 && bound_violations == 0,
        detail: format!(
            "max identity error {worst_identity:.2e} of |f|/δ (≤1e-12), {bound_violations} bound violations, max |g|/bound {worst_ratio:.4}"
        ),
    }
}

fn gradient_vs_finite_difference() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let k = coexistence::default_interval();
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let p = random_params(&mut rng);
        let z = rng.random_range(k.lower()..k.upper());
        // Richardson-extrapolated central difference, O(h^4).
        let cd = |h: f64| (cost(&p, z + h) - cost(&p, z - h)) / (2.0 * h);
        let h = 1e-3;
        let fd = (4.0 * cd(h / 2.0) - cd(h)) / 3.0;
        let g = analytic_gradient(&p, z);
        worst = worst.max((g - fd).abs() / g.abs());
    }
    Outcome {
        pass: worst < 1e-6,
        detail: format!("max relative error {worst:.2e} (<1e-6) over 1000 draws"),
    }
}

/// Golden-section search whose comparisons use the z-dependent part of the
/// cost in difference form, so ties from cancellation never decide a step.
fn golden_oracle(p: &CoexistenceParams, k: &DecisionInterval) -> f64 {
    let n = p.stations() as f64;
    let a = p.on_time() + p.c1();
    // H(b) - H(a) for H(z) = (n+1) ln(a + e^z) - n z.
    let diff = |x: f64, y: f64| (n + 1.0) * (x.exp() * (y - x).exp_m1() / (a + x.exp())).ln_1p() - n * (y - x);
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (k.lower(), k.upper());
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    while hi - lo > 1e-12 {
        if diff(x1, x2) > 0.0 {
            hi = x2;
            x2 = x1;
            x1 = hi - inv_phi * (hi - lo);
        } else {
            lo = x1;
            x1 = x2;
            x2 = lo + inv_phi * (hi - lo);
        }
    }
    let mid = 0.5 * (lo + hi);
    // The interior search never samples the endpoints themselves.
    [k.lower(), mid, k.upper()]
        .into_iter()
        .min_by(|&x, &y| diff(y, x).partial_cmp(&0.0).unwrap())
        .unwrap()
}

fn optimum_oracles() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let (mut worst_golden, mut worst_grid): (f64, f64) = (0.0, 0.0);
    let mut clamped = 0;
    for _ in 0..100 {
        let p = random_params(&mut rng);
        let k = if rng.random_bool(0.5) {
            coexistence::default_interval()
        } else {
            random_interval(&mut rng)
        };
        let opt = optimal_ztilde(&p, &k);
        clamped += usize::from(!opt.interior);
        worst_golden = worst_golden.max((opt.ztilde - golden_oracle(&p, &k)).abs());
        let points = 100_000;
        let (mut best_x, mut best_f) = (k.lower(), f64::INFINITY);
        for i in 0..points {
            let x = k.lower() + k.diameter() * i as f64 / (points - 1) as f64;
            let fx = cost(&p, x);
            if fx < best_f {
                best_x = x;
                best_f = fx;
            }
        }
        worst_grid = worst_grid.max((opt.ztilde - best_x).abs());
    }
    Outcome {
        pass: worst_golden <= 1e-8 && worst_grid <= 1e-4,
        detail: format!(
            "max |z*-golden| {worst_golden:.2e} (≤1e-8), max |z*-grid| {worst_grid:.2e} (≤1e-4), {clamped}/100 clamped"
        ),
    }
}

fn params_for(n: u32) -> CoexistenceParams {
    ParameterPack::default().params(n).unwrap()
}

fn omega_convergence() -> Outcome {
    let k = coexistence::default_interval();
    let mut lines = Vec::new();
    let mut pass = true;
    for omega in [0.01, 0.1, 1.0] {
        for n in [1, 5, 10] {
            let plan = ExperimentPlan::new(Scenario::OmegaSweep, 50)
                .with_exploration(omega, 0.75)
                .with_stations(n);
            let records = run_plan(&plan).unwrap();
            let p = params_for(n);
            let opt = optimal_ztilde(&p, &k);
            let f_star = cost(&p, opt.ztilde);
            let (mut close, mut gap_ok) = (0, 0);
            for r in &records {
                let last = r.iterations.last().unwrap();
                close += usize::from((last.next_toff - opt.toff).abs() <= 0.02);
                gap_ok += usize::from(cost(&p, r.final_center) - f_star <= 0.05 * (n + 1) as f64);
            }
            let ok = close * 10 >= records.len() * 9 && gap_ok * 10 >= records.len() * 9;
            pass &= ok;
            lines.push(format!("ω={omega} n={n}: {close}/25 within 20ms, {gap_ok}/25 gap ok"));
        }
    }
    Outcome {
        pass,
        detail: lines.join("; "),
    }
}

/// Fraction of runs whose analytic throughputs at the center reached after
/// iteration `k` are within `tol` of the optimum for that iteration's `n`.
fn tracking(records: &[TrajectoryRecord], k: usize, tol: f64) -> (usize, f64) {
    let interval = coexistence::default_interval();
    let mut hits = 0;
    let mut worst: f64 = 0.0;
    for r in records {
        let it = &r.iterations[k];
        let p = params_for(it.stations);
        let (lte, wifi) = throughputs_at(&p, it.next_center);
        let (lte_opt, wifi_opt) = throughputs_at(&p, optimal_ztilde(&p, &interval).ztilde);
        let err = ((lte - lte_opt).abs() / lte_opt).max((wifi - wifi_opt).abs() / wifi_opt);
        worst = worst.max(err);
        hits += usize::from(err <= tol);
    }
    (hits, worst)
}

fn slow_dynamics_plan(path: &[u32]) -> ExperimentPlan {
    let mut plan = ExperimentPlan::new(Scenario::SlowDynamics, 50 * path.len() as u64);
    plan.environment = EnvironmentSpec::analytic(path[0]);
    plan.dynamics = staircase(path, 50);
    plan
}

fn slow_dynamics() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for path in [[1, 2, 3, 4, 5], [5, 4, 3, 2, 1]] {
        let records = run_plan(&slow_dynamics_plan(&path)).unwrap();
        let mut segs = Vec::new();
        for (seg, n) in path.iter().enumerate() {
            let (hits, worst) = tracking(&records, seg * 50 + 49, 0.1);
            pass &= hits * 5 >= records.len() * 4;
            segs.push(format!("n={n}:{hits}/25 (worst {:.1}%)", worst * 100.0));
        }
        parts.push(format!("{:?} {}", path, segs.join(" ")));
    }
    // The single nine-segment walk is reported but not gated.
    let combined = run_plan(&ExperimentPlan::preset(Scenario::SlowDynamics).unwrap()).unwrap();
    let segs: Vec<String> = (0..9)
        .map(|seg| {
            let (hits, _) = tracking(&combined, seg * 50 + 49, 0.1);
            format!("{hits}")
        })
        .collect();
    parts.push(format!("info: single 1..5..1 walk per-segment hits [{}]", segs.join(",")));
    Outcome {
        pass,
        detail: parts.join("; "),
    }
}

fn regret_bound() -> Outcome {
    let plan = ExperimentPlan::preset(Scenario::BoundCheck).unwrap();
    let records = run_plan(&plan).unwrap();
    let r = regret_report(&plan, &records).unwrap();
    Outcome {
        pass: r.within_bound() && r.sublinear(),
        detail: format!(
            "T={} mean R={:.2} (sd {:.2}) ≤ bound {:.1}: {}; R/T {:.4} < R_half/(T/2) {:.4}: {}; G={:.3} C={:.2} L={:.1} η={:.4} δ={:.4}",
            r.rounds,
            r.regret.mean,
            r.regret.std,
            r.bound,
            r.within_bound(),
            r.regret.mean / r.rounds as f64,
            r.half_regret.mean / r.half_rounds as f64,
            r.sublinear(),
            r.lipschitz,
            r.cost_spread,
            r.total_deviation,
            r.eta,
            r.delta
        ),
    }
}

fn calibration() -> Outcome {
    let rows = packet_sim::calibrate(&ParameterPack::default(), &[1, 5, 10], &[0.05, 0.2, 0.5], 50.0, 10, 7).unwrap();
    let worst = rows.iter().map(|r| r.max_rel_error).fold(0.0, f64::max);
    let detail: Vec<String> = rows
        .iter()
        .map(|r| format!("n={} {:.0}ms {:.2}%", r.stations, r.toff * 1e3, r.max_rel_error * 100.0))
        .collect();
    Outcome {
        pass: worst <= 0.05,
        detail: format!("worst {:.2}% (≤5%): {}", worst * 100.0, detail.join(", ")),
    }
}

fn noisy_convergence() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for n in [1, 5, 10] {
        let plan = ExperimentPlan::preset(Scenario::NoisySim).unwrap().with_stations(n);
        let records = run_plan(&plan).unwrap();
        let (hits, worst) = tracking(&records, 99, 0.1);
        pass &= hits * 5 >= records.len() * 4;
        let toffs: Vec<f64> = records.iter().map(|r| r.iterations[99].next_toff * 1e3).collect();
        let p = params_for(n);
        let (lte_opt, _) = throughputs_at(&p, optimal_ztilde(&p, &coexistence::default_interval()).ztilde);
        let lte_mean = records.iter().map(|r| throughputs_at(&p, r.iterations[99].next_center).0).sum::<f64>()
            / records.len() as f64;
        let spread = Summary::of(&toffs);
        parts.push(format!(
            "n={n}: {hits}/25 within 10% (worst {:.1}%, run-averaged LTE off by {:.1}%), Toff {:.1}±{:.1} ms [{:.1}, {:.1}] vs opt {:.1} ms",
            worst * 100.0,
            (lte_mean - lte_opt).abs() / lte_opt * 100.0,
            spread.mean,
            spread.std,
            spread.min,
            spread.max,
            records[0].iterations[99].opt_toff * 1e3
        ));
    }
    Outcome {
        pass,
        detail: parts.join("; "),
    }
}

fn main() {
    let secs = Duration::from_secs;
    let results = [
        check(1, "gradient estimator identities", secs(10), estimator_identities),
        check(2, "analytic gradient", secs(5), gradient_vs_finite_difference),
        check(3, "optimum oracle", secs(30), optimum_oracles),
        check(4, "convergence within 50 iterations", secs(60), omega_convergence),
        check(5, "slow station dynamics", secs(60), slow_dynamics),
        check(6, "regret bound", secs(60), regret_bound),
        check(7, "simulator calibration", secs(120), calibration),
        check(8, "noisy convergence", secs(300), noisy_convergence),
    ];
    let failed = results.iter().filter(|&&p| !p).count();
    println!("acceptance: {}/{} passed", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
