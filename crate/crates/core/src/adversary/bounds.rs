use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Inputs of the constant-parameter interval regret bound
/// `2D²/η + ηG²Δ + ηL/(4δ²) + 4δGΔ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Theorem1 {
    pub diameter: f64,
    pub lipschitz: f64,
    pub eta: f64,
    pub delta: f64,
    /// `Δ = r - s`.
    pub span: f64,
    /// Total deviation `L_[s,r]`.
    pub total_deviation: f64,
}

impl Theorem1 {
    pub fn bound(&self) -> Result<f64> {
        let Theorem1 {
            diameter: d,
            lipschitz: g,
            eta,
            delta,
            span,
            total_deviation: l,
        } = *self;
        if !(d > 0.0) {
            return Err(Error::param("diameter", "must be positive"));
        }
        if !(eta > 0.0) {
            return Err(Error::param("eta", format!("must be positive, got {eta}")));
        }
        if !(delta > 0.0 && delta < d / 2.0) {
            return Err(Error::param("delta", format!("must lie in (0, D/2) = (0, {}), got {delta}", d / 2.0)));
        }
        if !(g >= 0.0 && span >= 0.0 && l >= 0.0) {
            return Err(Error::param("theorem1", "G, span and L must be nonnegative"));
        }
        Ok(2.0 * d * d / eta + eta * g * g * span + eta * l / (4.0 * delta * delta) + 4.0 * delta * g * span)
    }
}

/// Regimes with prescribed `(η, δ)` tunings.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "regime", rename_all = "kebab-case")]
pub enum Corollary {
    /// No assumption beyond Lipschitz, bounded losses.
    General,
    /// `N` loss switches; bound on the full regret.
    SwitchingTotal { switches: u32 },
    /// Regret within one interval on which the loss is unchanged.
    SwitchingInterval,
    /// Consecutive losses at most `alpha` apart in sup norm.
    Slow { alpha: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorollaryBound {
    pub eta: f64,
    pub delta: f64,
    pub bound: f64,
}

/// Tuned `(η, δ)` and the resulting regret bound for horizon `T`, diameter
/// `D`, Lipschitz constant `G` and range bound `C`.
pub fn corollary_bound(which: Corollary, horizon: f64, d: f64, g: f64, c: f64) -> Result<CorollaryBound> {
    if !(horizon >= 2.0) {
        return Err(Error::param("horizon", format!("need T >= 2, got {horizon}")));
    }
    if !(d > 0.0 && g > 0.0 && c > 0.0) {
        return Err(Error::param("corollary", "D, G and C must be positive"));
    }
    let t = horizon;
    let t34 = t.powf(0.75);
    let t14 = t.powf(0.25);
    let ln_t = t.ln();
    let out = match which {
        Corollary::General => CorollaryBound {
            eta: g / (d * t34),
            delta: c / t14,
            bound: (2.0 * g * d + 4.0 * g * c + g / (4.0 * d)) * t34 + g * d * t14,
        },
        Corollary::SwitchingTotal { switches } => CorollaryBound {
            eta: g / (d * t.sqrt()),
            delta: c * ln_t / t,
            bound: (switches as f64 / 2.0 + 3.0) * g * d * t.sqrt() + 4.0 * c * g * ln_t,
        },
        Corollary::SwitchingInterval => CorollaryBound {
            eta: g / (d * t.sqrt()),
            delta: c * ln_t / t,
            bound: 3.0 * g * d * t.sqrt() + 4.0 * c * g * ln_t + 2.0 * c,
        },
        Corollary::Slow { alpha } => {
            if !(alpha >= 0.0) {
                return Err(Error::param("alpha", "must be nonnegative"));
            }
            CorollaryBound {
                eta: g / (d * t34),
                delta: alpha / t14,
                bound: (2.0 * g * d + 4.0 * g * alpha + g / (4.0 * d)) * t34 + g * d * t14,
            }
        }
    };
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn th(d: f64, g: f64, eta: f64, delta: f64, span: f64, l: f64) -> Theorem1 {
        Theorem1 {
            diameter: d,
            lipschitz: g,
            eta,
            delta,
            span,
            total_deviation: l,
        }
    }

    #[test]
    fn theorem1_arithmetic() {
        let b = th(6.9, 10.0, 0.1, 0.01, 100.0, 0.0).bound().unwrap();
        assert_relative_eq!(b, 952.2 + 1000.0 + 40.0, max_relative = 1e-12);
        // 2 + 1 + 1/(4 * 0.0625) + 4 * 0.25
        let b = th(1.0, 1.0, 1.0, 0.25, 1.0, 1.0).bound().unwrap();
        assert_relative_eq!(b, 8.0, max_relative = 1e-12);
    }

    #[test]
    fn deviation_term_vanishes_without_deviation() {
        for delta in [1e-6, 1e-3, 0.4] {
            let b = th(1.0, 1.0, 0.5, delta, 10.0, 0.0).bound().unwrap();
            assert_relative_eq!(b, 4.0 + 5.0 + 40.0 * delta, max_relative = 1e-12);
        }
    }

    #[test]
    fn theorem1_rejects_large_delta() {
        assert!(th(1.0, 1.0, 1.0, 0.5, 1.0, 0.0).bound().is_err());
        assert!(th(1.0, 1.0, 0.0, 0.1, 1.0, 0.0).bound().is_err());
    }

    #[test]
    fn corollary_general_example() {
        let b = corollary_bound(Corollary::General, 1e4, 1.0, 1.0, 1.0).unwrap();
        assert_relative_eq!(b.eta, 1e-3, max_relative = 1e-12);
        assert_relative_eq!(b.delta, 0.1, max_relative = 1e-12);
        assert_relative_eq!(b.bound, 6260.0, max_relative = 1e-12);
    }

    #[test]
    fn corollary_degenerate_terms() {
        let (t, d, g, c) = (400.0f64, 2.0, 3.0, 5.0);
        let b = corollary_bound(Corollary::SwitchingTotal { switches: 0 }, t, d, g, c).unwrap();
        assert_relative_eq!(b.bound, 3.0 * g * d * t.sqrt() + 4.0 * c * g * t.ln(), max_relative = 1e-12);
        let i = corollary_bound(Corollary::SwitchingInterval, t, d, g, c).unwrap();
        assert_relative_eq!(i.bound, b.bound + 2.0 * c, max_relative = 1e-12);
        let s = corollary_bound(Corollary::Slow { alpha: 0.0 }, t, d, g, c).unwrap();
        let expected = (2.0 * g * d + g / (4.0 * d)) * t.powf(0.75) + g * d * t.powf(0.25);
        assert_relative_eq!(s.bound, expected, max_relative = 1e-12);
        assert_eq!(s.delta, 0.0);
        assert!(corollary_bound(Corollary::General, 1.0, d, g, c).is_err());
    }
}
