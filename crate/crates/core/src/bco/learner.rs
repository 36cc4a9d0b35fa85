use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{DecisionInterval, ExplorationSchedule, StepSizeSchedule};
use crate::{Error, Result};

/// Direction `ε_k ∈ {-1, +1}` of the first query of an outer iteration.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    fn draw(rng: &mut impl Rng) -> Sign {
        if rng.random_bool(0.5) {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }
}

/// Two-round finite difference `(g⁺ - g⁻) / (2 ε δ)`.
pub fn gradient_estimate(gplus: f64, gminus: f64, sign: Sign, delta: f64) -> Result<f64> {
    if !(delta.is_finite() && delta > 0.0) {
        return Err(Error::param("delta", format!("must be positive, got {delta}")));
    }
    Ok((gplus - gminus) / (2.0 * sign.value() * delta))
}

/// Guard against gradient estimates blown up by a loss change between the
/// two rounds of an iteration. A truncated estimate is replaced by the
/// gradient applied in the previous iteration (zero if there is none).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Truncation {
    Off,
    /// Truncate when `|g̃| > factor · bound`, with `bound` a Lipschitz
    /// constant of the losses.
    Lipschitz { bound: f64, factor: f64 },
    /// Truncate when `|g̃| > factor · |g̃_prev|`. Never fires twice in a row,
    /// so a lasting change in gradient scale is accepted one iteration later.
    Relative { factor: f64 },
}

impl Default for Truncation {
    fn default() -> Self {
        Truncation::Relative { factor: 10.0 }
    }
}

impl Truncation {
    pub fn validate(&self) -> Result<()> {
        let (factor, bound) = match *self {
            Truncation::Off => return Ok(()),
            Truncation::Lipschitz { bound, factor } => (factor, bound),
            Truncation::Relative { factor } => (factor, 1.0),
        };
        if !(factor.is_finite() && factor > 0.0) {
            return Err(Error::param("truncation.factor", format!("must be positive, got {factor}")));
        }
        if !(bound.is_finite() && bound > 0.0) {
            return Err(Error::param("truncation.bound", format!("must be positive, got {bound}")));
        }
        Ok(())
    }

    fn threshold(&self, previous: Option<f64>, previous_truncated: bool) -> Option<f64> {
        match *self {
            Truncation::Off => None,
            Truncation::Lipschitz { bound, factor } => Some(factor * bound),
            Truncation::Relative { factor } => match previous {
                Some(g) if g != 0.0 && !previous_truncated => Some(factor * g.abs()),
                _ => None,
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LearnerConfig {
    pub interval: DecisionInterval,
    pub exploration: ExplorationSchedule,
    pub step_size: StepSizeSchedule,
    pub truncation: Truncation,
    /// Starting center `y_0`; the interval midpoint when absent.
    pub initial: Option<f64>,
    pub seed: u64,
}

impl LearnerConfig {
    pub fn new(interval: DecisionInterval) -> Self {
        LearnerConfig {
            interval,
            exploration: ExplorationSchedule::default(),
            step_size: StepSizeSchedule::default(),
            truncation: Truncation::default(),
            initial: None,
            seed: 0,
        }
    }

    /// Frozen `η` and `δ` for every iteration.
    pub fn constant(interval: DecisionInterval, eta: f64, delta: f64) -> Self {
        LearnerConfig {
            exploration: ExplorationSchedule::constant(delta),
            step_size: StepSizeSchedule::constant(eta),
            truncation: Truncation::Off,
            ..LearnerConfig::new(interval)
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.exploration.validate()?;
        self.step_size.validate()?;
        self.truncation.validate()?;
        let delta0 = self.exploration.at(0);
        let (lo, hi) = self.interval.shrunk(delta0)?;
        if let Some(y0) = self.initial {
            if !(lo <= y0 && y0 <= hi) {
                return Err(Error::param(
                    "initial",
                    format!("y0 = {y0} lies outside K_δ0 = [{lo}, {hi}]"),
                ));
            }
        }
        Ok(())
    }
}

/// Which query the learner issues next.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Phase {
    AwaitPlus,
    AwaitMinus,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Query {
    /// One-based bandit round.
    pub round: u64,
    pub point: f64,
}

/// Outcome of a completed outer iteration.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepReport {
    pub k: u64,
    pub sign: Sign,
    pub delta: f64,
    pub eta: f64,
    pub center: f64,
    pub gplus: f64,
    pub gminus: f64,
    /// Estimate before truncation.
    pub raw_gradient: f64,
    /// Gradient actually used for the update.
    pub gradient: f64,
    pub truncated: bool,
    pub next_center: f64,
}

/// OGD-SeMP learner over a one-dimensional interval.
///
/// Drive it by alternating [`Learner::next_query`] and [`Learner::observe`].
/// Every second observation completes an outer iteration and yields a
/// [`StepReport`].
#[derive(Clone, Debug)]
pub struct Learner {
    config: LearnerConfig,
    center: f64,
    k: u64,
    phase: Phase,
    sign: Sign,
    gplus: f64,
    pending: bool,
    last_gradient: Option<f64>,
    last_truncated: bool,
    rng: ChaCha8Rng,
}

impl Learner {
    pub fn new(config: LearnerConfig) -> Result<Self> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let sign = Sign::draw(&mut rng);
        let center = config.initial.unwrap_or_else(|| config.interval.midpoint());
        Ok(Learner {
            config,
            center,
            k: 0,
            phase: Phase::AwaitPlus,
            sign,
            gplus: f64::NAN,
            pending: false,
            last_gradient: None,
            last_truncated: false,
            rng,
        })
    }

    pub fn config(&self) -> &LearnerConfig {
        &self.config
    }

    /// Current center `y_k`.
    pub fn center(&self) -> f64 {
        self.center
    }

    /// Current outer iteration `k`.
    pub fn iteration(&self) -> u64 {
        self.k
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn sign(&self) -> Sign {
        self.sign
    }

    pub fn delta(&self) -> f64 {
        self.config.exploration.at(self.k)
    }

    pub fn eta(&self) -> f64 {
        self.config.step_size.at(self.k)
    }

    /// Round number of the next query.
    pub fn round(&self) -> u64 {
        match self.phase {
            Phase::AwaitPlus => 2 * self.k + 1,
            Phase::AwaitMinus => 2 * self.k + 2,
        }
    }

    pub fn next_query(&mut self) -> Result<Query> {
        if self.pending {
            return Err(Error::Protocol("next_query called twice without observe"));
        }
        let offset = self.sign.value() * self.delta();
        let point = match self.phase {
            Phase::AwaitPlus => self.center + offset,
            Phase::AwaitMinus => self.center - offset,
        };
        self.pending = true;
        Ok(Query {
            round: self.round(),
            point,
        })
    }

    pub fn observe(&mut self, cost: f64) -> Result<Option<StepReport>> {
        if !self.pending {
            return Err(Error::Protocol("observe called without a pending query"));
        }
        if !cost.is_finite() {
            return Err(Error::param("cost", format!("must be finite, got {cost}")));
        }
        self.pending = false;
        match self.phase {
            Phase::AwaitPlus => {
                self.gplus = cost;
                self.phase = Phase::AwaitMinus;
                Ok(None)
            }
            Phase::AwaitMinus => Ok(Some(self.update(cost)?)),
        }
    }

    fn update(&mut self, gminus: f64) -> Result<StepReport> {
        let delta = self.delta();
        let eta = self.eta();
        let raw = gradient_estimate(self.gplus, gminus, self.sign, delta)?;
        let truncated = self
            .config
            .truncation
            .threshold(self.last_gradient, self.last_truncated)
            .is_some_and(|limit| raw.abs() > limit);
        let gradient = if truncated {
            self.last_gradient.unwrap_or(0.0)
        } else {
            raw
        };
        let next = self
            .config
            .interval
            .project(delta, self.center - eta * gradient)?;
        let report = StepReport {
            k: self.k,
            sign: self.sign,
            delta,
            eta,
            center: self.center,
            gplus: self.gplus,
            gminus,
            raw_gradient: raw,
            gradient,
            truncated,
            next_center: next,
        };
        self.center = next;
        self.last_gradient = Some(gradient);
        self.last_truncated = truncated;
        self.k += 1;
        self.phase = Phase::AwaitPlus;
        self.sign = Sign::draw(&mut self.rng);
        Ok(report)
    }

    /// Runs one full outer iteration against a cost oracle `f(round, x)`.
    pub fn step<F>(&mut self, mut cost: F) -> Result<StepReport>
    where
        F: FnMut(u64, f64) -> f64,
    {
        let q = self.next_query()?;
        self.observe(cost(q.round, q.point))?;
        let q = self.next_query()?;
        let report = self.observe(cost(q.round, q.point))?;
        Ok(report.expect("second observation completes an iteration"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn interval() -> DecisionInterval {
        DecisionInterval::new(-6.9, 0.0).unwrap()
    }

    fn learner(y0: f64, delta: f64, sign: Sign) -> Learner {
        let mut cfg = LearnerConfig::constant(interval(), 0.1, delta);
        cfg.initial = Some(y0);
        let mut l = Learner::new(cfg).unwrap();
        l.sign = sign;
        l
    }

    #[test]
    fn query_points_follow_sign() {
        let mut l = learner(-3.0, 0.1, Sign::Plus);
        let q = l.next_query().unwrap();
        assert_eq!(q.round, 1);
        assert!((q.point - -2.9).abs() < 1e-12);
        l.observe(0.0).unwrap();
        let q = l.next_query().unwrap();
        assert_eq!(q.round, 2);
        assert!((q.point - -3.1).abs() < 1e-12);
    }

    #[test]
    fn boundary_query_stays_inside() {
        let mut l = learner(-6.8, 0.1, Sign::Minus);
        let q = l.next_query().unwrap();
        assert!((q.point - -6.9).abs() < 1e-12);
        assert!(interval().contains(q.point.max(-6.9)));
    }

    #[test]
    fn protocol_violations_are_reported() {
        let mut l = learner(-3.0, 0.1, Sign::Plus);
        assert!(matches!(l.observe(1.0), Err(Error::Protocol(_))));
        l.next_query().unwrap();
        assert!(matches!(l.next_query(), Err(Error::Protocol(_))));
        // the failed call left the pending query intact
        assert!(l.observe(1.0).unwrap().is_none());
    }

    #[test]
    fn quadratic_estimate_is_exact_for_both_signs() {
        let f = |x: f64| x * x;
        for sign in [Sign::Plus, Sign::Minus] {
            let cfg = LearnerConfig {
                initial: Some(1.0),
                ..LearnerConfig::constant(DecisionInterval::new(-2.0, 2.0).unwrap(), 0.1, 0.5)
            };
            let mut l = Learner::new(cfg).unwrap();
            l.sign = sign;
            let r = l.step(|_, x| f(x)).unwrap();
            let (gp, gm) = match sign {
                Sign::Plus => (2.25, 0.25),
                Sign::Minus => (0.25, 2.25),
            };
            assert_eq!((r.gplus, r.gminus), (gp, gm));
            assert_eq!(r.raw_gradient, 2.0);
            assert!((r.next_center - 0.8).abs() < 1e-15);
        }
    }

    #[test]
    fn equal_costs_give_zero_gradient() {
        let mut l = learner(-3.0, 0.01, Sign::Plus);
        let r = l.step(|_, _| 1.0).unwrap();
        assert_eq!(r.raw_gradient, 0.0);
        assert_eq!(r.next_center, -3.0);
    }

    #[test]
    fn gradient_estimate_arithmetic() {
        assert_eq!(gradient_estimate(4.0, 0.0, Sign::Plus, 0.5).unwrap(), 4.0);
        assert_eq!(gradient_estimate(0.0, 4.0, Sign::Minus, 0.5).unwrap(), 4.0);
        assert_eq!(gradient_estimate(1.0, 1.0, Sign::Plus, 0.01).unwrap(), 0.0);
        assert!(gradient_estimate(1.0, 0.0, Sign::Plus, 0.0).is_err());
    }

    #[test]
    fn lipschitz_truncation_reuses_previous_gradient() {
        let mut cfg = LearnerConfig::constant(interval(), 0.01, 0.1);
        cfg.initial = Some(-3.0);
        cfg.truncation = Truncation::Lipschitz {
            bound: 1.0,
            factor: 10.0,
        };
        let mut l = Learner::new(cfg).unwrap();
        // slope 0.5 everywhere
        let first = l.step(|_, x| 0.5 * x).unwrap();
        assert!(!first.truncated);
        assert!((first.gradient - 0.5).abs() < 1e-12);
        // second round of the next iteration jumps by 100
        let second = l.step(|t, x| 0.5 * x + if t % 2 == 0 { 100.0 } else { 0.0 }).unwrap();
        assert!(second.truncated);
        assert!(second.raw_gradient.abs() > 10.0);
        assert_eq!(second.gradient, first.gradient);
    }

    #[test]
    fn relative_truncation_never_fires_twice_in_a_row() {
        let mut cfg = LearnerConfig::constant(interval(), 1e-4, 0.1);
        cfg.initial = Some(-3.0);
        cfg.truncation = Truncation::Relative { factor: 10.0 };
        let mut l = Learner::new(cfg).unwrap();
        assert!(!l.step(|_, x| 0.1 * x).unwrap().truncated);
        assert!(l.step(|_, x| 5.0 * x).unwrap().truncated);
        assert!(!l.step(|_, x| 5.0 * x).unwrap().truncated);
        assert!(!l.step(|_, x| 5.0 * x).unwrap().truncated);
    }

    #[test]
    fn rejects_initial_outside_shrunk_set() {
        let mut cfg = LearnerConfig::constant(interval(), 0.1, 0.5);
        cfg.initial = Some(-0.2);
        assert!(Learner::new(cfg).is_err());
        let cfg = LearnerConfig::constant(interval(), 0.1, 4.0);
        assert!(Learner::new(cfg).is_err());
    }

    #[test]
    fn same_seed_same_trajectory() {
        let run = |seed| {
            let mut cfg = LearnerConfig::new(interval());
            cfg.exploration = ExplorationSchedule::power(0.5, 0.75);
            cfg.seed = seed;
            let mut l = Learner::new(cfg).unwrap();
            (0..200)
                .map(|_| l.step(|t, x| (x + 2.0).powi(2) + (t as f64).sin()).unwrap())
                .collect::<Vec<_>>()
        };
        assert_eq!(run(7), run(7));
        assert_ne!(run(7), run(8));
    }
}
