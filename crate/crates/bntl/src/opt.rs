//! Bounded 1-D maximization: coarse grid bracketing followed by
//! golden-section refinement. All likelihood optima in this crate are found
//! through these two helpers.

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section maximization of `f` on `[lo, hi]`.
pub fn golden_max<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, iters: u32) -> (f64, f64) {
    let mut a = lo;
    let mut b = hi;
    let mut c = b - (b - a) * INV_PHI;
    let mut d = a + (b - a) * INV_PHI;
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..iters {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - (b - a) * INV_PHI;
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + (b - a) * INV_PHI;
            fd = f(d);
        }
    }
    if fc > fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Evaluates `f` on a uniform grid of `grid` points, brackets the best cell,
/// and refines by golden section. Guards bracketing against non-unimodal
/// surfaces: the grid pass picks the global cell before refinement.
pub fn grid_then_golden<F: FnMut(f64) -> f64>(
    mut f: F,
    lo: f64,
    hi: f64,
    grid: u32,
    golden_iters: u32,
) -> (f64, f64) {
    debug_assert!(grid >= 2 && hi > lo);
    let step = (hi - lo) / (grid as f64 - 1.0);
    let mut best_i = 0u32;
    let mut best_f = f64::NEG_INFINITY;
    let mut best_x = lo;
    for i in 0..grid {
        let x = lo + step * i as f64;
        let fx = f(x);
        if fx > best_f {
            best_f = fx;
            best_i = i;
            best_x = x;
        }
    }
    let a = lo + step * best_i.saturating_sub(1) as f64;
    let b = (lo + step * (best_i + 1) as f64).min(hi);
    let (x, fx) = golden_max(&mut f, a, b, golden_iters);
    if fx >= best_f {
        (x, fx)
    } else {
        (best_x, best_f)
    }
}
