//! Grid scan followed by golden-section refinement.

use crate::error::{invalid, Result};

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Minimize `g` on `[lo, hi]`.
///
/// Scans `grid_points` equally spaced points (ties resolved toward the
/// smallest abscissa), then runs golden-section search over the two grid
/// cells adjacent to the best point. The refined point replaces the grid
/// point only if it is strictly better.
pub fn minimize_scalar<G: FnMut(f64) -> f64>(mut g: G, lo: f64, hi: f64, grid_points: usize) -> Result<(f64, f64)> {
    if !(lo < hi) {
        return Err(invalid("lo", "must be strictly less than hi"));
    }
    if grid_points < 8 {
        return Err(invalid("grid_points", "need at least 8"));
    }
    let step = (hi - lo) / (grid_points - 1) as f64;
    let node = |k: usize| if k + 1 == grid_points { hi } else { lo + step * k as f64 };
    let mut best = (lo, g(lo), 0usize);
    for k in 1..grid_points {
        let x = node(k);
        let v = g(x);
        if v < best.1 {
            best = (x, v, k);
        }
    }
    let mut a = node(best.2.saturating_sub(1));
    let mut b = node((best.2 + 1).min(grid_points - 1));

    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut gc = g(c);
    let mut gd = g(d);
    for _ in 0..200 {
        if (b - a).abs() <= 1e-10 * (1.0 + c.abs()) {
            break;
        }
        if gc < gd {
            b = d;
            d = c;
            gd = gc;
            c = b - INV_PHI * (b - a);
            gc = g(c);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + INV_PHI * (b - a);
            gd = g(d);
        }
    }
    let (x, v) = if gc < gd { (c, gc) } else { (d, gd) };
    if v < best.1 {
        Ok((x, v))
    } else {
        Ok((best.0, best.1))
    }
}
