//! Loss sequences and the measurements used to check regret guarantees:
//! instantaneous and total deviation, best fixed point in hindsight,
//! (interval) regret, and the closed-form regret bounds.

mod bounds;
mod loss;
mod regret;
mod sequence;

pub use bounds::{corollary_bound, Corollary, CorollaryBound, Theorem1};
pub use loss::{spot_check, Affine, Constant, FnLoss, LossFunction, LossRef, Quadratic, Shifted, SpotCheck};
pub use regret::{best_fixed_point, regret, FixedPoint, Record, RegretLedger};
pub use sequence::{instantaneous_deviation, total_deviation, AdversarySequence, DEFAULT_GRID};
