use std::collections::BTreeSet;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::adversary::{corollary_bound, AdversarySequence, Corollary, CorollaryBound, LossRef};
use crate::bco::{DecisionInterval, ExplorationSchedule, LearnerConfig, StepSizeSchedule};
use crate::coexistence::{self, CoexistenceLoss, ParameterPack};
use crate::packet_sim::OffTimeLaw;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    OmegaSweep,
    ScheduleSweep,
    SlowDynamics,
    FastDynamics,
    NoisySim,
    BoundCheck,
}

impl Scenario {
    pub const ALL: [Scenario; 6] = [
        Scenario::OmegaSweep,
        Scenario::ScheduleSweep,
        Scenario::SlowDynamics,
        Scenario::FastDynamics,
        Scenario::NoisySim,
        Scenario::BoundCheck,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::OmegaSweep => "omega-sweep",
            Scenario::ScheduleSweep => "schedule-sweep",
            Scenario::SlowDynamics => "slow-dynamics",
            Scenario::FastDynamics => "fast-dynamics",
            Scenario::NoisySim => "noisy-sim",
            Scenario::BoundCheck => "bound-check",
        }
    }
}

/// Where in iteration `k` a change of the station count lands.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SwitchTiming {
    /// Between the two queries of the iteration, so the gradient estimate
    /// straddles two different losses.
    #[default]
    MidPair,
    /// Before the first query; both queries see the new loss.
    PairBoundary,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StationChange {
    pub iteration: u64,
    pub stations: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum EnvironmentSpec {
    Analytic {
        pack: ParameterPack,
        stations: u32,
    },
    PacketSim {
        pack: ParameterPack,
        stations: u32,
        batch_duration: f64,
        off_time: OffTimeLaw,
    },
}

impl EnvironmentSpec {
    pub fn analytic(stations: u32) -> Self {
        EnvironmentSpec::Analytic {
            pack: ParameterPack::default(),
            stations,
        }
    }

    pub fn packet_sim(stations: u32, batch_duration: f64) -> Self {
        EnvironmentSpec::PacketSim {
            pack: ParameterPack::default(),
            stations,
            batch_duration,
            off_time: OffTimeLaw::default(),
        }
    }

    pub fn pack(&self) -> &ParameterPack {
        match self {
            EnvironmentSpec::Analytic { pack, .. } | EnvironmentSpec::PacketSim { pack, .. } => pack,
        }
    }

    pub fn stations(&self) -> u32 {
        match self {
            EnvironmentSpec::Analytic { stations, .. } | EnvironmentSpec::PacketSim { stations, .. } => *stations,
        }
    }

    pub fn set_stations(&mut self, n: u32) {
        match self {
            EnvironmentSpec::Analytic { stations, .. } | EnvironmentSpec::PacketSim { stations, .. } => *stations = n,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPlan {
    pub scenario: Scenario,
    /// Outer iterations `k_max`; each costs two rounds.
    pub iterations: u64,
    pub seeds: Vec<u64>,
    /// The per-replication seed overrides `learner.seed`.
    pub learner: LearnerConfig,
    pub environment: EnvironmentSpec,
    pub dynamics: Vec<StationChange>,
    pub switch_timing: SwitchTiming,
    /// Seconds of `T̄_off` error counted as converged.
    pub convergence_tolerance: f64,
    /// Relative throughput error counted as tracking the optimum.
    pub throughput_tolerance: f64,
}

pub fn seed_range(base: u64, count: u32) -> Vec<u64> {
    (0..count as u64).map(|i| base + i).collect()
}

/// One station step every `every` iterations, walking through `path`.
pub fn staircase(path: &[u32], every: u64) -> Vec<StationChange> {
    path.iter()
        .enumerate()
        .skip(1)
        .map(|(i, &n)| StationChange {
            iteration: i as u64 * every,
            stations: n,
        })
        .collect()
}

impl ExperimentPlan {
    /// Analytic environment, `n = 10`, default learner, 25 seeds.
    pub fn new(scenario: Scenario, iterations: u64) -> Self {
        ExperimentPlan {
            scenario,
            iterations,
            seeds: seed_range(1, 25),
            learner: LearnerConfig::new(coexistence::default_interval()),
            environment: EnvironmentSpec::analytic(10),
            dynamics: Vec::new(),
            switch_timing: SwitchTiming::default(),
            convergence_tolerance: 0.02,
            throughput_tolerance: 0.1,
        }
    }

    pub fn preset(scenario: Scenario) -> Result<Self> {
        let mut plan = ExperimentPlan::new(scenario, 100);
        match scenario {
            Scenario::OmegaSweep => {}
            Scenario::ScheduleSweep => {
                plan.learner.exploration = ExplorationSchedule::power(0.01, 0.5);
            }
            Scenario::SlowDynamics => {
                plan.iterations = 450;
                plan.environment = EnvironmentSpec::analytic(1);
                plan.dynamics = staircase(&[1, 2, 3, 4, 5, 4, 3, 2, 1], 50);
            }
            Scenario::FastDynamics => {
                plan.iterations = 500;
                plan.dynamics = staircase(&[10, 5, 10, 1, 10], 100);
            }
            Scenario::NoisySim => {
                plan.learner.exploration = ExplorationSchedule::power(1.0, 0.75);
                plan.environment = EnvironmentSpec::packet_sim(10, 50.0);
            }
            Scenario::BoundCheck => {
                plan.iterations = 1000;
                plan.environment = EnvironmentSpec::analytic(1);
                plan.dynamics = vec![StationChange {
                    iteration: 666,
                    stations: 5,
                }];
                let tuned = plan.corollary_tuning()?;
                plan.learner = LearnerConfig::constant(plan.learner.interval, tuned.eta, tuned.delta);
            }
        }
        Ok(plan)
    }

    pub fn interval(&self) -> &DecisionInterval {
        &self.learner.interval
    }

    pub fn validate(&self) -> Result<()> {
        self.learner.validate()?;
        if self.seeds.is_empty() {
            return Err(Error::param("seeds", "need at least one replication"));
        }
        let distinct: BTreeSet<u64> = self.seeds.iter().copied().collect();
        if distinct.len() != self.seeds.len() {
            return Err(Error::param("seeds", "seeds must be distinct"));
        }
        let mut prev = 0;
        for ev in &self.dynamics {
            if ev.iteration <= prev || ev.iteration >= self.iterations {
                return Err(Error::param(
                    "dynamics",
                    format!(
                        "event iterations must increase strictly within 1..{}, got {}",
                        self.iterations, ev.iteration
                    ),
                ));
            }
            prev = ev.iteration;
        }
        for n in self.station_counts() {
            if n == 0 {
                return Err(Error::param("stations", "need at least one station"));
            }
            self.environment.pack().params(n)?;
        }
        if let EnvironmentSpec::PacketSim { batch_duration, off_time, .. } = &self.environment {
            if !(batch_duration.is_finite() && *batch_duration > 0.0) {
                return Err(Error::param("batch_duration", "must be positive"));
            }
            let OffTimeLaw::Uniform { spread } = *off_time;
            if !(0.0..1.0).contains(&spread) {
                return Err(Error::param("spread", "must lie in [0, 1)"));
            }
        }
        for (name, v) in [
            ("convergence_tolerance", self.convergence_tolerance),
            ("throughput_tolerance", self.throughput_tolerance),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::param(name, "must be positive"));
            }
        }
        Ok(())
    }

    /// Station count in force for the records of iteration `k`.
    pub fn stations_at(&self, k: u64) -> u32 {
        self.dynamics
            .iter()
            .take_while(|ev| ev.iteration <= k)
            .last()
            .map_or(self.environment.stations(), |ev| ev.stations)
    }

    /// Every station count the plan visits, in order of first appearance.
    pub fn station_counts(&self) -> Vec<u32> {
        let mut out = vec![self.environment.stations()];
        for ev in &self.dynamics {
            if !out.contains(&ev.stations) {
                out.push(ev.stations);
            }
        }
        out
    }

    /// Round at which the loss for event `ev` takes over.
    pub fn switch_round(&self, ev: &StationChange) -> u64 {
        match self.switch_timing {
            SwitchTiming::MidPair => 2 * ev.iteration + 2,
            SwitchTiming::PairBoundary => 2 * ev.iteration + 1,
        }
    }

    /// The analytic losses the learner faces, round by round.
    pub fn adversary(&self) -> Result<AdversarySequence> {
        let horizon = 2 * self.iterations;
        let interval = self.interval();
        let pack = self.environment.pack();
        let loss = |n: u32| -> Result<LossRef> { Ok(Arc::new(CoexistenceLoss::new(pack.params(n)?, interval))) };
        let mut pieces = vec![loss(self.environment.stations())?];
        let mut starts = Vec::new();
        for ev in &self.dynamics {
            pieces.push(loss(ev.stations)?);
            starts.push(self.switch_round(ev));
        }
        AdversarySequence::piecewise(pieces, starts, horizon)
    }

    /// Largest gradient magnitude on `K` and largest cost spread
    /// `max f - min f` over the losses of the plan.
    pub fn loss_constants(&self) -> Result<(f64, f64)> {
        let interval = self.interval();
        let mut g: f64 = 0.0;
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for n in self.station_counts() {
            let params = self.environment.pack().params(n)?;
            g = g.max(coexistence::lipschitz_on(&params, interval));
            let (a, b) = coexistence::cost_range(&params, interval);
            lo = lo.min(a);
            hi = hi.max(b);
        }
        Ok((g, hi - lo))
    }

    /// Constant `η` and `δ` prescribed for a piecewise adversary with the
    /// plan's number of switches over `2·k_max` rounds.
    pub fn corollary_tuning(&self) -> Result<CorollaryBound> {
        let (g, c) = self.loss_constants()?;
        corollary_bound(
            Corollary::SwitchingTotal {
                switches: self.dynamics.len() as u32,
            },
            (2 * self.iterations) as f64,
            self.interval().diameter(),
            g,
            c,
        )
    }

    /// Copy of the plan with a different exploration schedule.
    pub fn with_exploration(&self, omega: f64, exponent: f64) -> Self {
        let mut plan = self.clone();
        plan.learner.exploration = ExplorationSchedule::power(omega, exponent);
        plan
    }

    pub fn with_step_size(&self, scale: f64, exponent: f64) -> Self {
        let mut plan = self.clone();
        plan.learner.step_size = StepSizeSchedule::power(scale, exponent);
        plan
    }

    pub fn with_stations(&self, n: u32) -> Self {
        let mut plan = self.clone();
        plan.environment.set_stations(n);
        plan
    }
}
