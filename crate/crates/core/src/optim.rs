//! One-dimensional minimisation on a bracket.

/// Golden-section search for the minimiser of a unimodal `f` on `[lo, hi]`,
/// stopping once the bracket is narrower than `xtol`. Returns `(x, f(x))`.
///
/// The endpoints are compared against the interior estimate, so monotone
/// functions report the exact boundary minimiser.
pub fn golden_section<F>(mut f: F, lo: f64, hi: f64, xtol: f64) -> (f64, f64)
where
    F: FnMut(f64) -> f64,
{
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > xtol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let mid = 0.5 * (a + b);
    let mut best = (mid, f(mid));
    for x in [lo, hi] {
        let fx = f(x);
        if fx < best.1 {
            best = (x, fx);
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_interior_vertex() {
        let (x, fx) = golden_section(|x| (x - 1.0) * (x - 1.0), -2.0, 2.0, 1e-10);
        assert!((x - 1.0).abs() < 1e-8);
        assert!(fx < 1e-15);
    }

    #[test]
    fn finds_boundary_minimiser() {
        let (x, fx) = golden_section(|x| x, 0.0, 1.0, 1e-10);
        assert_eq!(x, 0.0);
        assert_eq!(fx, 0.0);
        let (x, _) = golden_section(|x| -x, 0.0, 1.0, 1e-10);
        assert_eq!(x, 1.0);
    }
}
