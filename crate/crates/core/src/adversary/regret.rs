use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::AdversarySequence;
use crate::bco::DecisionInterval;
use crate::optim::golden_section;
use crate::{Error, Result};

/// Tolerance in `x` for the hindsight minimisation.
const ARGMIN_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub t: u64,
    pub x: f64,
    pub cost: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FixedPoint {
    pub x: f64,
    pub total_cost: f64,
}

/// Best fixed decision in hindsight over rounds `s..=r`,
/// `argmin_{x∈K} Σ f_t(x)`, by golden-section search.
pub fn best_fixed_point(
    sequence: &AdversarySequence,
    s: u64,
    r: u64,
    interval: &DecisionInterval,
) -> Result<FixedPoint> {
    // surfaces range errors before the search
    sequence.cumulative(s, r, interval.lower())?;
    let (x, total_cost) = golden_section(
        |x| sequence.cumulative(s, r, x).expect("range checked"),
        interval.lower(),
        interval.upper(),
        ARGMIN_TOL,
    );
    Ok(FixedPoint { x, total_cost })
}

/// Append-only record of what the learner played and paid.
#[derive(Clone, Debug)]
pub struct RegretLedger {
    adversary: Arc<AdversarySequence>,
    records: Vec<Record>,
}

impl RegretLedger {
    pub fn new(adversary: Arc<AdversarySequence>) -> Self {
        RegretLedger {
            adversary,
            records: Vec::new(),
        }
    }

    pub fn adversary(&self) -> &AdversarySequence {
        &self.adversary
    }

    pub fn records(&self) -> &[Record] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Appends round `t`, which must directly follow the last recorded round.
    pub fn record(&mut self, t: u64, x: f64, cost: f64) -> Result<()> {
        let expected = self.records.len() as u64 + 1;
        if t != expected {
            return Err(Error::InvalidRounds {
                s: t,
                r: expected,
                reason: "ledger rounds must be consecutive starting at 1",
            });
        }
        self.records.push(Record { t, x, cost });
        Ok(())
    }

    /// Records round `t` at `x`, charging the adversary's loss.
    pub fn play(&mut self, t: u64, x: f64) -> Result<f64> {
        let cost = self.adversary.value(t, x)?;
        self.record(t, x, cost)?;
        Ok(cost)
    }

    /// Interval regret `R_[s,r]`; `s = 1, r = T` gives the full regret.
    pub fn regret(&self, s: u64, r: u64, interval: &DecisionInterval) -> Result<f64> {
        if s == 0 || s > r || r as usize > self.records.len() {
            return Err(Error::InvalidRounds {
                s,
                r,
                reason: "ledger does not cover the interval",
            });
        }
        let paid: f64 = self.records[s as usize - 1..r as usize].iter().map(|rec| rec.cost).sum();
        let best = best_fixed_point(&self.adversary, s, r, interval)?;
        Ok(paid - best.total_cost)
    }
}

pub fn regret(ledger: &RegretLedger, s: u64, r: u64, interval: &DecisionInterval) -> Result<f64> {
    ledger.regret(s, r, interval)
}
