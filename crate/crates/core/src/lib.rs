//! Online gradient descent with sequential two-point gradient estimates
//! (OGD-SeMP) for one-dimensional bandit convex optimisation, plus the
//! LTE/WiFi proportional-fair duty-cycle problem it is applied to.
//!
//! The crate is organised bottom-up:
//!
//! - [`bco`]: the learner itself, a seedable query/observe state machine.
//! - [`adversary`]: loss sequences, regret and deviation measurement, and
//!   closed-form regret bounds.
//! - [`coexistence`]: the analytic throughput model and its convex
//!   log-domain cost.
//! - [`packet_sim`]: a slotted LTE/WiFi simulator producing noisy costs.
//! - [`experiments`]: seeded, replicated experiment plans.
//! - [`config`], [`output`] and [`cli`]: the `semp` command-line tool.

// Range checks are written `!(x > 0.0)` on purpose so that NaN fails them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod adversary;
pub mod bco;
pub mod cli;
pub mod coexistence;
pub mod config;
mod error;
pub mod experiments;
pub mod optim;
pub mod output;
pub mod packet_sim;
pub mod stats;

pub use error::{Error, Result};

/// SplitMix64 finaliser, used to derive independent stream seeds from one
/// replication seed.
pub fn mix_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed
        .wrapping_add(stream.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
