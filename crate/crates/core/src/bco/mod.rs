//! OGD-SeMP: online gradient descent driven by gradient estimates built from
//! two *consecutive* bandit rounds.
//!
//! Each outer iteration `k` plays `y_k + ε_k δ_k` in round `2k+1` and
//! `y_k - ε_k δ_k` in round `2k+2`, then forms the finite difference of the
//! two observed costs and takes a projected gradient step onto the shrunken
//! interval `K_{δ_k}`.

mod interval;
mod learner;
mod schedule;

pub use interval::{project, DecisionInterval};
pub use learner::{
    gradient_estimate, Learner, LearnerConfig, Phase, Query, Sign, StepReport, Truncation,
};
pub use schedule::{ExplorationSchedule, StepSizeSchedule};
