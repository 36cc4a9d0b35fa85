use serde::{Deserialize, Serialize};

use crate::adversary::{total_deviation, Theorem1, DEFAULT_GRID};
use crate::stats::Summary;
use crate::{Error, Result};

use super::plan::ExperimentPlan;
use super::runner::TrajectoryRecord;

/// Cross-replication statistics for one iteration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationSummary {
    pub k: u64,
    pub y: Summary,
    pub toff: Summary,
    pub gradient: Summary,
    pub s_lte: Summary,
    pub s_wifi_mean: Summary,
    pub regret: Summary,
    pub opt_toff: Summary,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AggregateSummary {
    pub runs: usize,
    pub per_iteration: Vec<IterationSummary>,
    /// Per run: first iteration from which `T̄_off` stays within tolerance.
    pub convergence: Vec<Option<u64>>,
    /// Over the runs that converged.
    pub convergence_time: Option<Summary>,
    pub final_toff: Summary,
}

/// First `k` with `|T̄_off(y_j) - T̄_off*_j| ≤ tolerance` for every `j ≥ k`.
pub fn convergence_time(record: &TrajectoryRecord, tolerance: f64) -> Option<u64> {
    let mut first = None;
    for it in record.iterations.iter().rev() {
        if (it.toff - it.opt_toff).abs() <= tolerance {
            first = Some(it.k);
        } else {
            break;
        }
    }
    first
}

/// Iterations beyond the shortest record are dropped from the
/// per-iteration statistics.
pub fn aggregate(records: &[TrajectoryRecord], tolerance: f64) -> Result<AggregateSummary> {
    if records.is_empty() {
        return Err(Error::param("records", "need at least one trajectory"));
    }
    let len = records.iter().map(|r| r.iterations.len()).min().unwrap_or(0);
    let per_iteration = (0..len)
        .map(|i| {
            let col = |f: fn(&super::runner::IterationRecord) -> f64| {
                Summary::of(&records.iter().map(|r| f(&r.iterations[i])).collect::<Vec<_>>())
            };
            IterationSummary {
                k: records[0].iterations[i].k,
                y: col(|it| it.y),
                toff: col(|it| it.toff),
                gradient: col(|it| it.gradient),
                s_lte: col(|it| it.s_lte),
                s_wifi_mean: col(|it| it.s_wifi_mean),
                regret: col(|it| it.regret_so_far),
                opt_toff: col(|it| it.opt_toff),
            }
        })
        .collect();
    let convergence: Vec<Option<u64>> = records.iter().map(|r| convergence_time(r, tolerance)).collect();
    let converged: Vec<f64> = convergence.iter().flatten().map(|&k| k as f64).collect();
    let finals: Vec<f64> = records
        .iter()
        .filter_map(|r| r.iterations.last().map(|it| it.next_toff))
        .collect();
    Ok(AggregateSummary {
        runs: records.len(),
        per_iteration,
        convergence,
        convergence_time: (!converged.is_empty()).then(|| Summary::of(&converged)),
        final_toff: Summary::of(&finals),
    })
}

/// Measured regret next to the Theorem-1 style bound for a finished
/// constant-parameter run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegretReport {
    /// Rounds `[1, r]` the regret is measured on; `r` is odd so no
    /// iteration is split.
    pub rounds: u64,
    pub regret: Summary,
    /// Same, over the first half of the run.
    pub half_rounds: u64,
    pub half_regret: Summary,
    pub diameter: f64,
    pub lipschitz: f64,
    pub cost_spread: f64,
    pub total_deviation: f64,
    pub eta: f64,
    pub delta: f64,
    pub bound: f64,
    /// The closed-form bound prescribed for this kind of adversary.
    pub corollary_bound: f64,
}

impl RegretReport {
    pub fn within_bound(&self) -> bool {
        self.regret.mean <= self.bound
    }

    /// Average regret per round shrinks from the half horizon to the full one.
    pub fn sublinear(&self) -> bool {
        self.regret.mean / self.rounds as f64 <= self.half_regret.mean / self.half_rounds as f64
    }
}

fn last_odd(r: u64) -> u64 {
    if r % 2 == 1 {
        r
    } else {
        r - 1
    }
}

pub fn regret_report(plan: &ExperimentPlan, records: &[TrajectoryRecord]) -> Result<RegretReport> {
    let learner = &plan.learner;
    if !(learner.exploration.is_constant() && learner.step_size.is_constant()) {
        return Err(Error::param(
            "learner",
            "regret bounds need a constant-parameter learner",
        ));
    }
    if records.is_empty() || plan.iterations < 2 {
        return Err(Error::param("records", "need at least one run of two or more iterations"));
    }
    let interval = plan.interval();
    let adversary = plan.adversary()?;
    let rounds = last_odd(2 * plan.iterations - 1);
    let half_rounds = last_odd(plan.iterations);
    let measure = |r: u64| -> Result<Summary> {
        let values = records
            .iter()
            .map(|rec| rec.regret(&adversary, 1, r, interval))
            .collect::<Result<Vec<_>>>()?;
        Ok(Summary::of(&values))
    };
    let (lipschitz, cost_spread) = plan.loss_constants()?;
    let deviation = total_deviation(&adversary, 1, rounds, interval, DEFAULT_GRID)?;
    let eta = learner.step_size.at(0);
    let delta = learner.exploration.at(0);
    let bound = Theorem1 {
        diameter: interval.diameter(),
        lipschitz,
        eta,
        delta,
        span: (rounds - 1) as f64,
        total_deviation: deviation,
    }
    .bound()?;
    let corollary = plan.corollary_tuning()?;
    Ok(RegretReport {
        rounds,
        regret: measure(rounds)?,
        half_rounds,
        half_regret: measure(half_rounds)?,
        diameter: interval.diameter(),
        lipschitz,
        cost_spread,
        total_deviation: deviation,
        eta,
        delta,
        bound,
        corollary_bound: corollary.bound,
    })
}
