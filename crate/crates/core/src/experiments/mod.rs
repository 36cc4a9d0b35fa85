//! Seeded, replicated runs of the learner against the coexistence cost.

mod aggregate;
mod env;
mod plan;
mod runner;

pub use aggregate::{aggregate, convergence_time, regret_report, AggregateSummary, IterationSummary, RegretReport};
pub use env::{build as build_environment, AnalyticEnv, Environment, Evaluation, SimEnv};
pub use plan::{seed_range, staircase, EnvironmentSpec, ExperimentPlan, Scenario, StationChange, SwitchTiming};
pub use runner::{run_plan, run_replication, IterationRecord, RoundEvent, TrajectoryRecord};
