use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::loss::{LossFunction, LossRef, Shifted};
use crate::bco::DecisionInterval;
use crate::{Error, Result};

/// Grid size used for sup-norm deviations unless told otherwise. For
/// `G`-Lipschitz losses the grid underestimates the supremum by at most
/// `G·D/(points-1)`.
pub const DEFAULT_GRID: usize = 10_000;

/// The losses `f_1, …, f_T` chosen by an oblivious adversary. Rounds are
/// one-based.
#[derive(Clone, Debug)]
pub enum AdversarySequence {
    Fixed {
        loss: LossRef,
        horizon: u64,
    },
    /// `f_t = φ_{τ(t)}`; piece `i+1` takes over at round `starts[i]`.
    Piecewise {
        pieces: Vec<LossRef>,
        starts: Vec<u64>,
        horizon: u64,
    },
    /// `f_t = base + shifts[t-1]` with consecutive shifts at most `alpha` apart.
    Drift {
        base: LossRef,
        shifts: Vec<f64>,
        alpha: f64,
    },
    /// Explicit per-round losses.
    Custom(Vec<LossRef>),
}

impl AdversarySequence {
    pub fn fixed(loss: LossRef, horizon: u64) -> Self {
        AdversarySequence::Fixed { loss, horizon }
    }

    pub fn piecewise(pieces: Vec<LossRef>, starts: Vec<u64>, horizon: u64) -> Result<Self> {
        if pieces.is_empty() {
            return Err(Error::param("pieces", "need at least one loss"));
        }
        if starts.len() + 1 != pieces.len() {
            return Err(Error::param(
                "starts",
                format!("{} pieces need {} switch rounds, got {}", pieces.len(), pieces.len() - 1, starts.len()),
            ));
        }
        let mut prev = 1;
        for &s in &starts {
            if s <= prev || s > horizon {
                return Err(Error::param(
                    "starts",
                    format!("switch rounds must increase strictly within 2..={horizon}, got {s}"),
                ));
            }
            prev = s;
        }
        Ok(AdversarySequence::Piecewise {
            pieces,
            starts,
            horizon,
        })
    }

    pub fn drift(base: LossRef, shifts: Vec<f64>, alpha: f64) -> Result<Self> {
        if !(alpha >= 0.0) {
            return Err(Error::param("alpha", "must be nonnegative"));
        }
        if let Some(w) = shifts.windows(2).find(|w| (w[1] - w[0]).abs() > alpha * (1.0 + 1e-12)) {
            return Err(Error::param(
                "shifts",
                format!("step {} exceeds alpha = {alpha}", (w[1] - w[0]).abs()),
            ));
        }
        Ok(AdversarySequence::Drift { base, shifts, alpha })
    }

    /// Drift whose shift follows a random walk with uniform steps in `[-α, α]`.
    pub fn drift_random_walk(base: LossRef, horizon: u64, alpha: f64, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut level = 0.0;
        let shifts = (0..horizon)
            .map(|t| {
                if t > 0 && alpha > 0.0 {
                    level += rng.random_range(-alpha..=alpha);
                }
                level
            })
            .collect();
        AdversarySequence::drift(base, shifts, alpha)
    }

    pub fn custom(losses: Vec<LossRef>) -> Self {
        AdversarySequence::Custom(losses)
    }

    pub fn horizon(&self) -> u64 {
        match self {
            AdversarySequence::Fixed { horizon, .. } | AdversarySequence::Piecewise { horizon, .. } => *horizon,
            AdversarySequence::Drift { shifts, .. } => shifts.len() as u64,
            AdversarySequence::Custom(losses) => losses.len() as u64,
        }
    }

    fn check_round(&self, t: u64) -> Result<()> {
        if t == 0 || t > self.horizon() {
            return Err(Error::InvalidRounds {
                s: t,
                r: t,
                reason: "round outside 1..=horizon",
            });
        }
        Ok(())
    }

    fn piece_of(starts: &[u64], t: u64) -> usize {
        starts.partition_point(|&s| s <= t)
    }

    pub fn loss(&self, t: u64) -> Result<LossRef> {
        self.check_round(t)?;
        Ok(match self {
            AdversarySequence::Fixed { loss, .. } => loss.clone(),
            AdversarySequence::Piecewise { pieces, starts, .. } => pieces[Self::piece_of(starts, t)].clone(),
            AdversarySequence::Drift { base, shifts, .. } => Arc::new(Shifted {
                base: base.clone(),
                shift: shifts[t as usize - 1],
            }),
            AdversarySequence::Custom(losses) => losses[t as usize - 1].clone(),
        })
    }

    pub fn value(&self, t: u64, x: f64) -> Result<f64> {
        self.check_round(t)?;
        Ok(match self {
            AdversarySequence::Fixed { loss, .. } => loss.value(x),
            AdversarySequence::Piecewise { pieces, starts, .. } => pieces[Self::piece_of(starts, t)].value(x),
            AdversarySequence::Drift { base, shifts, .. } => base.value(x) + shifts[t as usize - 1],
            AdversarySequence::Custom(losses) => losses[t as usize - 1].value(x),
        })
    }

    /// Distinct losses in play, for bounds that need a global `G` or `C`.
    pub fn distinct_losses(&self) -> Vec<LossRef> {
        match self {
            AdversarySequence::Fixed { loss, .. } => vec![loss.clone()],
            AdversarySequence::Piecewise { pieces, .. } => pieces.clone(),
            AdversarySequence::Drift { base, .. } => vec![base.clone()],
            AdversarySequence::Custom(losses) => losses.clone(),
        }
    }

    /// Number of loss changes between consecutive rounds.
    pub fn switches(&self) -> usize {
        match self {
            AdversarySequence::Piecewise { starts, .. } => starts.len(),
            AdversarySequence::Fixed { .. } => 0,
            AdversarySequence::Drift { shifts, .. } => shifts.windows(2).filter(|w| w[0] != w[1]).count(),
            AdversarySequence::Custom(losses) => losses
                .windows(2)
                .filter(|w| !std::ptr::addr_eq(Arc::as_ptr(&w[0]), Arc::as_ptr(&w[1])))
                .count(),
        }
    }

    /// `Σ_{t=s..=r} f_t(x)`.
    pub fn cumulative(&self, s: u64, r: u64, x: f64) -> Result<f64> {
        self.check_range(s, r)?;
        Ok(match self {
            AdversarySequence::Fixed { loss, .. } => (r - s + 1) as f64 * loss.value(x),
            AdversarySequence::Piecewise {
                pieces,
                starts,
                horizon,
            } => {
                let mut total = 0.0;
                for (i, piece) in pieces.iter().enumerate() {
                    let first = if i == 0 { 1 } else { starts[i - 1] };
                    let last = starts.get(i).map_or(*horizon, |&next| next - 1);
                    let (a, b) = (first.max(s), last.min(r));
                    if a <= b {
                        total += (b - a + 1) as f64 * piece.value(x);
                    }
                }
                total
            }
            AdversarySequence::Drift { base, shifts, .. } => {
                let shift: f64 = shifts[s as usize - 1..r as usize].iter().sum();
                (r - s + 1) as f64 * base.value(x) + shift
            }
            AdversarySequence::Custom(losses) => {
                losses[s as usize - 1..r as usize].iter().map(|f| f.value(x)).sum()
            }
        })
    }

    fn check_range(&self, s: u64, r: u64) -> Result<()> {
        if s == 0 || s > r {
            return Err(Error::InvalidRounds {
                s,
                r,
                reason: "need 1 <= s <= r",
            });
        }
        if r > self.horizon() {
            return Err(Error::InvalidRounds {
                s,
                r,
                reason: "range extends past the horizon",
            });
        }
        Ok(())
    }

    /// `α_k = sup_x |f_{2k+1}(x) - f_{2k+2}(x)|`, measured on a grid.
    pub fn pair_deviation(&self, k: u64, interval: &DecisionInterval, grid_points: usize) -> Result<f64> {
        let (t, u) = (2 * k + 1, 2 * k + 2);
        self.check_range(t, u)?;
        if let AdversarySequence::Drift { shifts, .. } = self {
            return Ok((shifts[t as usize - 1] - shifts[u as usize - 1]).abs());
        }
        let (a, b) = (self.loss(t)?, self.loss(u)?);
        if std::ptr::addr_eq(Arc::as_ptr(&a), Arc::as_ptr(&b)) {
            return Ok(0.0);
        }
        instantaneous_deviation(a.as_ref(), b.as_ref(), interval, grid_points)
    }
}

/// Largest `|f_a(x) - f_b(x)|` over a uniform grid of `grid_points` points
/// spanning `interval`, endpoints included.
pub fn instantaneous_deviation(
    f_a: &dyn LossFunction,
    f_b: &dyn LossFunction,
    interval: &DecisionInterval,
    grid_points: usize,
) -> Result<f64> {
    if grid_points < 2 {
        return Err(Error::param("grid_points", "need at least two grid points"));
    }
    let (lo, d) = (interval.lower(), interval.diameter());
    let last = (grid_points - 1) as f64;
    Ok((0..grid_points)
        .map(|i| {
            let x = if i + 1 == grid_points {
                interval.upper()
            } else {
                lo + d * i as f64 / last
            };
            (f_a.value(x) - f_b.value(x)).abs()
        })
        .fold(0.0, f64::max))
}

/// `L_[s,r] = Σ_{k=(s-1)/2}^{(r-1)/2} α_k²` for odd `s <= r`.
pub fn total_deviation(
    sequence: &AdversarySequence,
    s: u64,
    r: u64,
    interval: &DecisionInterval,
    grid_points: usize,
) -> Result<f64> {
    if s.is_multiple_of(2) || r.is_multiple_of(2) {
        return Err(Error::InvalidRounds {
            s,
            r,
            reason: "interval endpoints must be odd rounds",
        });
    }
    if s > r {
        return Err(Error::InvalidRounds {
            s,
            r,
            reason: "reversed interval",
        });
    }
    let mut total = 0.0;
    for k in (s - 1) / 2..=(r - 1) / 2 {
        total += sequence.pair_deviation(k, interval, grid_points)?.powi(2);
    }
    Ok(total)
}
