use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::adversary::{best_fixed_point, AdversarySequence, RegretLedger};
use crate::bco::{DecisionInterval, Learner};
use crate::coexistence::{self, CoexistenceParams};
use crate::{mix_seed, Error, Result};

use super::env::{self, Environment, Evaluation};
use super::plan::{ExperimentPlan, SwitchTiming};

/// One played round.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundEvent {
    pub t: u64,
    pub k: u64,
    pub x: f64,
    /// Analytic loss at `x`; what regret is charged with.
    pub cost: f64,
    /// Value fed to the learner; equals `cost` for analytic environments.
    pub observed: f64,
    pub stations: u32,
}

/// Everything tracked for outer iteration `k` (rounds `2k+1`, `2k+2`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub k: u64,
    pub t: u64,
    pub y: f64,
    pub queries: [f64; 2],
    pub toff: f64,
    pub delta: f64,
    pub eta: f64,
    pub raw_gradient: f64,
    pub gradient: f64,
    pub truncated: bool,
    pub s_lte: f64,
    pub s_wifi_mean: f64,
    /// Station count after any change made during this iteration.
    pub stations: u32,
    pub opt_ztilde: f64,
    pub opt_toff: f64,
    pub s_lte_opt: f64,
    pub s_wifi_opt: f64,
    /// Batch throughputs averaged over both queries (simulated runs only).
    pub measured_lte: Option<f64>,
    pub measured_wifi: Option<f64>,
    /// `R_[1, 2k+2]` against the analytic losses.
    pub regret_so_far: f64,
    pub next_center: f64,
    /// `T̄_off` at `next_center` under this iteration's station count.
    pub next_toff: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub run_id: usize,
    pub seed: u64,
    pub iterations: Vec<IterationRecord>,
    pub events: Vec<RoundEvent>,
    pub final_center: f64,
}

impl TrajectoryRecord {
    /// `R_[s,r]` recomputed from the round events.
    pub fn regret(&self, adversary: &AdversarySequence, s: u64, r: u64, interval: &DecisionInterval) -> Result<f64> {
        if s == 0 || s > r || r as usize > self.events.len() {
            return Err(Error::InvalidRounds {
                s,
                r,
                reason: "trajectory does not cover the interval",
            });
        }
        let paid: f64 = self.events[s as usize - 1..r as usize].iter().map(|e| e.cost).sum();
        Ok(paid - best_fixed_point(adversary, s, r, interval)?.total_cost)
    }
}

/// Runs every replication of `plan`, in parallel; the output order follows
/// `plan.seeds`.
pub fn run_plan(plan: &ExperimentPlan) -> Result<Vec<TrajectoryRecord>> {
    plan.validate()?;
    plan.seeds
        .par_iter()
        .enumerate()
        .map(|(run_id, &seed)| run_replication(plan, run_id, seed))
        .collect()
}

/// The learner is seeded with `seed`, the environment with a derived stream.
pub fn run_replication(plan: &ExperimentPlan, run_id: usize, seed: u64) -> Result<TrajectoryRecord> {
    let mut cfg = plan.learner.clone();
    cfg.seed = seed;
    let mut learner = Learner::new(cfg)?;
    let mut record = TrajectoryRecord {
        run_id,
        seed,
        iterations: Vec::with_capacity(plan.iterations as usize),
        events: Vec::with_capacity(2 * plan.iterations as usize),
        final_center: learner.center(),
    };
    if plan.iterations == 0 {
        return Ok(record);
    }
    let interval = *plan.interval();
    let adversary = Arc::new(plan.adversary()?);
    let mut ledger = RegretLedger::new(adversary);
    let mut environment = env::build(&plan.environment, mix_seed(seed, 1))?;
    let mut pending = plan.dynamics.iter().peekable();

    for k in 0..plan.iterations {
        let change = pending.next_if(|ev| ev.iteration == k).map(|ev| ev.stations);
        if plan.switch_timing == SwitchTiming::PairBoundary {
            if let Some(n) = change {
                environment.set_stations(n)?;
            }
        }
        let y = learner.center();
        let first = query(&mut learner, environment.as_mut(), &mut ledger, &mut record, k)?;
        if plan.switch_timing == SwitchTiming::MidPair {
            if let Some(n) = change {
                environment.set_stations(n)?;
            }
        }
        let second = query(&mut learner, environment.as_mut(), &mut ledger, &mut record, k)?;
        let report = second.1.ok_or(Error::Protocol("second observation did not complete the iteration"))?;

        let params = environment.params();
        let opt = coexistence::optimal_ztilde(params, &interval);
        let (s_lte, s_wifi_mean) = coexistence::throughputs_at(params, y);
        let (s_lte_opt, s_wifi_opt) = coexistence::throughputs_at(params, opt.ztilde);
        let measured = |f: fn(&Evaluation) -> Option<f64>| Some((f(&first.0)? + f(&second.0)?) / 2.0);
        record.iterations.push(IterationRecord {
            k,
            t: 2 * k + 1,
            y,
            queries: [record.events[2 * k as usize].x, record.events[2 * k as usize + 1].x],
            toff: toff(params, y),
            delta: report.delta,
            eta: report.eta,
            raw_gradient: report.raw_gradient,
            gradient: report.gradient,
            truncated: report.truncated,
            s_lte,
            s_wifi_mean,
            stations: params.stations(),
            opt_ztilde: opt.ztilde,
            opt_toff: opt.toff,
            s_lte_opt,
            s_wifi_opt,
            measured_lte: measured(|e| e.measured_lte),
            measured_wifi: measured(|e| e.measured_wifi),
            regret_so_far: ledger.regret(1, 2 * k + 2, &interval)?,
            next_center: report.next_center,
            next_toff: toff(params, report.next_center),
        });
    }
    record.final_center = learner.center();
    Ok(record)
}

fn toff(params: &CoexistenceParams, ztilde: f64) -> f64 {
    coexistence::ztilde_to_toff(ztilde, params.c1())
}

fn query(
    learner: &mut Learner,
    environment: &mut dyn Environment,
    ledger: &mut RegretLedger,
    record: &mut TrajectoryRecord,
    k: u64,
) -> Result<(Evaluation, Option<crate::bco::StepReport>)> {
    let q = learner.next_query()?;
    let eval = environment.evaluate(q.point)?;
    let cost = ledger.play(q.round, q.point)?;
    record.events.push(RoundEvent {
        t: q.round,
        k,
        x: q.point,
        cost,
        observed: eval.cost,
        stations: environment.stations(),
    });
    let report = learner.observe(eval.cost)?;
    Ok((eval, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::{ExperimentPlan, Scenario};

    #[test]
    fn empty_plan_gives_empty_trajectories() {
        let mut plan = ExperimentPlan::new(Scenario::OmegaSweep, 0);
        plan.seeds = vec![4, 5];
        let out = run_plan(&plan).unwrap();
        assert_eq!(out.len(), 2);
        assert!(out.iter().all(|r| r.iterations.is_empty() && r.events.is_empty()));
    }

    #[test]
    fn analytic_rounds_charge_what_they_observe() {
        let mut plan = ExperimentPlan::preset(Scenario::FastDynamics).unwrap();
        plan.seeds = vec![3];
        let rec = &run_plan(&plan).unwrap()[0];
        assert_eq!(rec.iterations.len(), 500);
        assert_eq!(rec.events.len(), 1000);
        for e in &rec.events {
            assert_eq!(e.cost, e.observed);
        }
        // The change at iteration 100 lands between the two queries.
        assert_eq!(rec.events[200].stations, 10);
        assert_eq!(rec.events[201].stations, 5);
        assert_eq!(rec.iterations[100].stations, 5);
    }
}
