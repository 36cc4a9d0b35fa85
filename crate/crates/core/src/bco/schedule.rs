use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Exploration radius `δ_k = ω / (k+1)^p`.
///
/// Iterations are counted from zero, so the schedule is evaluated at `k+1`
/// to keep `δ_0` finite. An exponent of zero gives a constant radius.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExplorationSchedule {
    pub omega: f64,
    pub exponent: f64,
}

/// Step size `η_k = scale / (k+1)^exponent`, by default `1/√(k+1)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepSizeSchedule {
    pub scale: f64,
    pub exponent: f64,
}

fn power_decay(scale: f64, exponent: f64, k: u64) -> f64 {
    if exponent == 0.0 {
        scale
    } else {
        scale / ((k + 1) as f64).powf(exponent)
    }
}

fn check(name: &'static str, scale: f64, exponent: f64) -> Result<()> {
    if !(scale.is_finite() && scale > 0.0) {
        return Err(Error::param(name, format!("scale must be positive, got {scale}")));
    }
    if !(exponent.is_finite() && exponent >= 0.0) {
        return Err(Error::param(
            name,
            format!("exponent must be nonnegative for a non-increasing schedule, got {exponent}"),
        ));
    }
    Ok(())
}

impl ExplorationSchedule {
    pub fn power(omega: f64, exponent: f64) -> Self {
        ExplorationSchedule { omega, exponent }
    }

    pub fn constant(delta: f64) -> Self {
        ExplorationSchedule {
            omega: delta,
            exponent: 0.0,
        }
    }

    pub fn at(&self, k: u64) -> f64 {
        power_decay(self.omega, self.exponent, k)
    }

    pub fn is_constant(&self) -> bool {
        self.exponent == 0.0
    }

    pub fn validate(&self) -> Result<()> {
        check("exploration", self.omega, self.exponent)
    }
}

impl StepSizeSchedule {
    pub fn power(scale: f64, exponent: f64) -> Self {
        StepSizeSchedule { scale, exponent }
    }

    pub fn constant(eta: f64) -> Self {
        StepSizeSchedule {
            scale: eta,
            exponent: 0.0,
        }
    }

    pub fn at(&self, k: u64) -> f64 {
        power_decay(self.scale, self.exponent, k)
    }

    pub fn is_constant(&self) -> bool {
        self.exponent == 0.0
    }

    pub fn validate(&self) -> Result<()> {
        check("step_size", self.scale, self.exponent)
    }
}

impl Default for StepSizeSchedule {
    fn default() -> Self {
        StepSizeSchedule::power(1.0, 0.5)
    }
}

impl Default for ExplorationSchedule {
    fn default() -> Self {
        ExplorationSchedule::power(0.01, 0.75)
    }
}
