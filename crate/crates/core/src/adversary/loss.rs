use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bco::DecisionInterval;

/// A convex loss over a one-dimensional decision set.
pub trait LossFunction: Send + Sync + fmt::Debug {
    fn value(&self, x: f64) -> f64;

    /// Analytic derivative, when known.
    fn gradient(&self, _x: f64) -> Option<f64> {
        None
    }

    /// Declared Lipschitz constant `G` on the decision set.
    fn lipschitz(&self) -> f64;

    /// Declared range bound `C` when the loss is known to lie in `[0, C]`.
    fn range_bound(&self) -> Option<f64> {
        None
    }
}

pub type LossRef = Arc<dyn LossFunction>;

/// `curvature · (x - center)² + offset`.
#[derive(Clone, Debug, PartialEq)]
pub struct Quadratic {
    curvature: f64,
    center: f64,
    offset: f64,
    lipschitz: f64,
    range: Option<f64>,
}

impl Quadratic {
    /// The Lipschitz constant and range are computed over `interval`.
    pub fn new(curvature: f64, center: f64, offset: f64, interval: &DecisionInterval) -> Self {
        let far = (interval.lower() - center).abs().max((interval.upper() - center).abs());
        let lipschitz = 2.0 * curvature.abs() * far;
        let ends = [interval.lower(), interval.upper()];
        let at = |x: f64| curvature * (x - center).powi(2) + offset;
        let mut lo = ends.iter().map(|&x| at(x)).fold(f64::INFINITY, f64::min);
        let hi = ends.iter().map(|&x| at(x)).fold(f64::NEG_INFINITY, f64::max);
        if interval.contains(center) {
            lo = lo.min(offset);
        }
        let hi = if curvature < 0.0 && interval.contains(center) {
            hi.max(offset)
        } else {
            hi
        };
        Quadratic {
            curvature,
            center,
            offset,
            lipschitz,
            range: (lo >= 0.0).then_some(hi),
        }
    }
}

impl LossFunction for Quadratic {
    fn value(&self, x: f64) -> f64 {
        self.curvature * (x - self.center).powi(2) + self.offset
    }

    fn gradient(&self, x: f64) -> Option<f64> {
        Some(2.0 * self.curvature * (x - self.center))
    }

    fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    fn range_bound(&self) -> Option<f64> {
        self.range
    }
}

/// `slope · x + intercept`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Affine {
    pub slope: f64,
    pub intercept: f64,
}

impl LossFunction for Affine {
    fn value(&self, x: f64) -> f64 {
        self.slope * x + self.intercept
    }

    fn gradient(&self, _x: f64) -> Option<f64> {
        Some(self.slope)
    }

    fn lipschitz(&self) -> f64 {
        self.slope.abs()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Constant(pub f64);

impl LossFunction for Constant {
    fn value(&self, _x: f64) -> f64 {
        self.0
    }

    fn gradient(&self, _x: f64) -> Option<f64> {
        Some(0.0)
    }

    fn lipschitz(&self) -> f64 {
        0.0
    }

    fn range_bound(&self) -> Option<f64> {
        (self.0 >= 0.0).then_some(self.0)
    }
}

/// `base(x) + shift`.
#[derive(Clone, Debug)]
pub struct Shifted {
    pub base: LossRef,
    pub shift: f64,
}

impl LossFunction for Shifted {
    fn value(&self, x: f64) -> f64 {
        self.base.value(x) + self.shift
    }

    fn gradient(&self, x: f64) -> Option<f64> {
        self.base.gradient(x)
    }

    fn lipschitz(&self) -> f64 {
        self.base.lipschitz()
    }
}

/// A loss given by a closure and a declared Lipschitz constant.
pub struct FnLoss<F> {
    f: F,
    lipschitz: f64,
}

impl<F> FnLoss<F>
where
    F: Fn(f64) -> f64 + Send + Sync,
{
    pub fn new(f: F, lipschitz: f64) -> Self {
        FnLoss { f, lipschitz }
    }
}

impl<F> fmt::Debug for FnLoss<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnLoss").field("lipschitz", &self.lipschitz).finish()
    }
}

impl<F> LossFunction for FnLoss<F>
where
    F: Fn(f64) -> f64 + Send + Sync,
{
    fn value(&self, x: f64) -> f64 {
        (self.f)(x)
    }

    fn lipschitz(&self) -> f64 {
        self.lipschitz
    }
}

/// Outcome of randomised spot checks of the declared loss properties.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SpotCheck {
    pub convex: bool,
    pub lipschitz: bool,
    /// Vacuously true when no range bound is declared.
    pub bounded: bool,
}

impl SpotCheck {
    pub fn all(&self) -> bool {
        self.convex && self.lipschitz && self.bounded
    }
}

/// Checks midpoint convexity, the declared Lipschitz constant and the
/// declared range on `pairs` random pairs from `interval`.
pub fn spot_check(f: &dyn LossFunction, interval: &DecisionInterval, pairs: usize, seed: u64) -> SpotCheck {
    const SLACK: f64 = 1e-9;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = (interval.lower(), interval.upper());
    let g = f.lipschitz();
    let c = f.range_bound();
    let mut out = SpotCheck {
        convex: true,
        lipschitz: true,
        bounded: true,
    };
    for _ in 0..pairs {
        let x = rng.random_range(lo..=hi);
        let y = rng.random_range(lo..=hi);
        let (fx, fy) = (f.value(x), f.value(y));
        let scale = 1.0 + fx.abs().max(fy.abs());
        if f.value(0.5 * (x + y)) > 0.5 * (fx + fy) + SLACK * scale {
            out.convex = false;
        }
        if (fx - fy).abs() > g * (x - y).abs() + SLACK * scale {
            out.lipschitz = false;
        }
        if let Some(c) = c {
            if fx < -SLACK || fx > c + SLACK {
                out.bounded = false;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k() -> DecisionInterval {
        DecisionInterval::new(-1.0, 2.0).unwrap()
    }

    #[test]
    fn quadratic_declarations_hold() {
        let q = Quadratic::new(1.5, 0.5, 0.2, &k());
        assert_eq!(q.lipschitz(), 2.0 * 1.5 * 1.5);
        assert_eq!(q.range_bound(), Some(1.5 * 2.25 + 0.2));
        assert!(spot_check(&q, &k(), 2000, 1).all());
    }

    #[test]
    fn spot_check_flags_violations() {
        let concave = FnLoss::new(|x: f64| -x * x, 10.0);
        assert!(!spot_check(&concave, &k(), 500, 2).convex);
        let steep = FnLoss::new(|x: f64| 5.0 * x, 1.0);
        assert!(!spot_check(&steep, &k(), 500, 3).lipschitz);
        let q = Quadratic::new(1.0, 0.0, -1.0, &k());
        assert_eq!(q.range_bound(), None);
        assert!(spot_check(&Constant(2.0), &k(), 10, 4).all());
    }
}
