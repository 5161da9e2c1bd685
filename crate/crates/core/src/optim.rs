//! One-dimensional maximization helpers shared by the bosonic and region code.

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section maximization of a unimodal `f` on `[lo, hi]` until the
/// bracket is narrower than `tol`. Equal interior values shrink toward the
/// left, so flat objectives converge to `lo`.
pub fn golden_section_max(f: impl Fn(f64) -> f64, lo: f64, hi: f64, tol: f64) -> (f64, f64) {
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while b - a > tol {
        if fd > fc {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        } else {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

/// Grid scan followed by golden-section refinement around the best grid
/// point. Only returns a point strictly better than `incumbent`'s value;
/// otherwise `None`, so ties keep the incumbent.
pub fn grid_then_golden(
    f: impl Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    grid: usize,
    tol: f64,
    incumbent: f64,
) -> Option<(f64, f64)> {
    let grid = grid.max(2);
    let step = (hi - lo) / (grid - 1) as f64;
    let mut best = (lo, f64::NEG_INFINITY);
    let mut best_i = 0;
    for i in 0..grid {
        let x = lo + step * i as f64;
        let v = f(x);
        if v > best.1 {
            best = (x, v);
            best_i = i;
        }
    }
    let a = lo + step * best_i.saturating_sub(1) as f64;
    let b = (lo + step * (best_i + 1) as f64).min(hi);
    let refined = golden_section_max(&f, a, b, tol);
    if refined.1 > best.1 {
        best = refined;
    }
    (best.1 > incumbent).then_some(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_parabola_peak() {
        let (x, v) = golden_section_max(|t| -(t - 0.3) * (t - 0.3), 0.0, 1.0, 1e-9);
        assert!((x - 0.3).abs() < 1e-8);
        assert!(v.abs() < 1e-15);
    }

    #[test]
    fn flat_objective_goes_left() {
        let (x, _) = golden_section_max(|_| 1.0, 0.0, 1.0, 1e-6);
        assert!(x < 1e-5);
    }

    #[test]
    fn tie_keeps_incumbent() {
        assert!(grid_then_golden(|_| 2.0, 0.0, 1.0, 8, 1e-6, 2.0).is_none());
        assert!(grid_then_golden(|t| t, 0.0, 1.0, 8, 1e-6, 0.5).is_some());
    }
}
