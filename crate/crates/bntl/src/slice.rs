//! Univariate slice sampling (Neal 2003) with stepping out and shrinkage.

use rand::Rng;

/// One slice-sampling move from `x0` targeting `log_target` (unnormalized).
///
/// The target may return `-inf` outside its support; the shrinkage loop
/// never escapes the support as long as `log_target(x0)` is finite.
pub fn slice_sample<F, R>(
    x0: f64,
    mut log_target: F,
    width: f64,
    max_step_outs: u32,
    rng: &mut R,
) -> f64
where
    F: FnMut(f64) -> f64,
    R: Rng + ?Sized,
{
    let fx0 = log_target(x0);
    if !fx0.is_finite() {
        // Current point carries no mass; nothing sensible to do but stay.
        return x0;
    }
    let log_y = fx0 + rng.random::<f64>().ln();

    // Stepping out.
    let u: f64 = rng.random();
    let mut left = x0 - u * width;
    let mut right = left + width;
    let mut j = (rng.random::<f64>() * max_step_outs as f64).floor() as u32;
    let mut k = max_step_outs.saturating_sub(1).saturating_sub(j);
    while j > 0 && log_y < log_target(left) {
        left -= width;
        j -= 1;
    }
    while k > 0 && log_y < log_target(right) {
        right += width;
        k -= 1;
    }

    // Shrinkage.
    loop {
        let x1 = left + rng.random::<f64>() * (right - left);
        if log_y < log_target(x1) {
            return x1;
        }
        if x1 < x0 {
            left = x1;
        } else {
            right = x1;
        }
        if (right - left) < 1e-300 {
            return x0;
        }
    }
}
