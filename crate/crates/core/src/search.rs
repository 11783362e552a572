//! One-dimensional search helpers shared by the sweeps.

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Golden-section maximization of `f` on `[a, b]`. Returns the best point
/// seen (endpoints included) and its value.
pub(crate) fn golden_max<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64) -> (f64, f64) {
    let (mut lo, mut hi) = (a.min(b), a.max(b));
    let mut best = (lo, f(lo));
    let fb = f(hi);
    if fb > best.1 {
        best = (hi, fb);
    }
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..200 {
        if hi - lo <= tol {
            break;
        }
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
        for (x, v) in [(x1, f1), (x2, f2)] {
            if v > best.1 {
                best = (x, v);
            }
        }
    }
    best
}

/// Golden-section minimization; see [`golden_max`].
pub(crate) fn golden_min<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64) -> (f64, f64) {
    let (x, v) = golden_max(|t| -f(t), a, b, tol);
    (x, -v)
}

/// Bisection for the switch point of a predicate with `pred(inside) = true`
/// and `pred(outside) = false`. Returns the last point known to satisfy it.
pub(crate) fn bisect_boundary<F: FnMut(f64) -> bool>(
    mut pred: F,
    mut inside: f64,
    mut outside: f64,
    iters: usize,
) -> f64 {
    for _ in 0..iters {
        let mid = 0.5 * (inside + outside);
        if mid == inside || mid == outside {
            break;
        }
        if pred(mid) {
            inside = mid;
        } else {
            outside = mid;
        }
    }
    inside
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_finds_interior_max() {
        let (x, v) = golden_max(|t| -(t - 0.3).powi(2), 0.0, 1.0, 1e-12);
        assert!((x - 0.3).abs() < 1e-6);
        assert!(v.abs() < 1e-12);
    }

    #[test]
    fn golden_keeps_endpoint() {
        let (x, _) = golden_max(|t| t, 0.0, 2.0, 1e-10);
        assert_eq!(x, 2.0);
        let (x, v) = golden_min(|t| (t - 1.5).abs(), 0.0, 2.0, 1e-12);
        assert!((x - 1.5).abs() < 1e-9 && v < 1e-9);
    }

    #[test]
    fn bisection_converges() {
        let r = bisect_boundary(|t| t * t <= 2.0, 0.0, 2.0, 200);
        assert!((r - 2f64.sqrt()).abs() < 1e-15);
        assert!(r * r <= 2.0);
    }
}
