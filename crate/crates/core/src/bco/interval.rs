use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A closed interval `[lower, upper]` with `lower < upper`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawInterval", into = "RawInterval")]
pub struct DecisionInterval {
    lower: f64,
    upper: f64,
}

#[derive(Serialize, Deserialize)]
struct RawInterval {
    lower: f64,
    upper: f64,
}

impl TryFrom<RawInterval> for DecisionInterval {
    type Error = Error;

    fn try_from(raw: RawInterval) -> Result<Self> {
        DecisionInterval::new(raw.lower, raw.upper)
    }
}

impl From<DecisionInterval> for RawInterval {
    fn from(k: DecisionInterval) -> Self {
        RawInterval {
            lower: k.lower,
            upper: k.upper,
        }
    }
}

impl DecisionInterval {
    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        if !(lower.is_finite() && upper.is_finite() && lower < upper) {
            return Err(Error::InvalidInterval { lower, upper });
        }
        Ok(DecisionInterval { lower, upper })
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }

    pub fn diameter(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }

    /// Bounds of `K_α = [lower + α, upper - α]`. The result may be a single
    /// point when `α` is exactly half the diameter.
    pub fn shrunk(&self, alpha: f64) -> Result<(f64, f64)> {
        let half = 0.5 * self.diameter();
        if !(alpha >= 0.0) {
            return Err(Error::param("alpha", format!("must be nonnegative, got {alpha}")));
        }
        if alpha > half {
            return Err(Error::EmptyShrunkInterval { alpha, half });
        }
        Ok((self.lower + alpha, self.upper - alpha))
    }

    /// Clamps `x` into `K_α`.
    pub fn project(&self, alpha: f64, x: f64) -> Result<f64> {
        let (lo, hi) = self.shrunk(alpha)?;
        Ok(x.min(hi).max(lo))
    }
}

/// Euclidean projection of `x` onto `K_α`.
pub fn project(interval: &DecisionInterval, alpha: f64, x: f64) -> Result<f64> {
    interval.project(alpha, x)
}
