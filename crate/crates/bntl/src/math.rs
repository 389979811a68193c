//! Log-space numeric helpers shared by the likelihood and sampler code.
//!
//! Everything downstream works with log-probabilities; plain gamma
//! evaluations overflow long before the data sizes of interest.

/// Natural log of the gamma function, valid for `x > 0`.
pub fn lgamma(x: f64) -> f64 {
    debug_assert!(x > 0.0, "lgamma argument must be positive, got {x}");
    statrs::function::gamma::ln_gamma(x)
}

/// Natural log of the beta function `B(a, b)` for positive arguments.
pub fn lbeta(a: f64, b: f64) -> f64 {
    lgamma(a) + lgamma(b) - lgamma(a + b)
}

/// Log binomial coefficient `C(m, k)`, or `None` when it is undefined
/// (negative arguments or `k > m`).
pub fn log_binomial(m: i64, k: i64) -> Option<f64> {
    if m < 0 || k < 0 || k > m {
        return None;
    }
    Some(lgamma(m as f64 + 1.0) - lgamma(k as f64 + 1.0) - lgamma((m - k) as f64 + 1.0))
}

/// log(sum(exp(xs))) with the usual max shift; -inf entries are skipped.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let s: f64 = xs.iter().map(|&x| (x - m).exp()).sum();
    m + s.ln()
}

/// Poisson log-pmf at `k` with mean `lambda`.
pub fn log_poisson_pmf(k: u64, lambda: f64) -> f64 {
    debug_assert!(lambda > 0.0);
    let kf = k as f64;
    kf * lambda.ln() - lambda - lgamma(kf + 1.0)
}

/// Log of the Poisson upper tail `P(X >= k)`.
///
/// Uses a scaled series from `k` upward when the tail is small, and the
/// complement of the lower sum otherwise, so deep tails keep full log
/// precision instead of underflowing through a CDF round trip.
pub fn log_poisson_sf_ge(k: u64, lambda: f64) -> f64 {
    debug_assert!(lambda > 0.0);
    if k == 0 {
        return 0.0;
    }
    if (k as f64) > lambda {
        // P(X >= k) = pmf(k) * sum_{j>=0} lambda^j * k!/(k+j)!
        let mut total = 1.0f64;
        let mut term = 1.0f64;
        let mut m = k as f64 + 1.0;
        loop {
            term *= lambda / m;
            total += term;
            m += 1.0;
            if term < total * 1e-18 {
                break;
            }
        }
        log_poisson_pmf(k, lambda) + total.ln()
    } else {
        // Lower sum is the smaller branch here; P(X < k) <= ~1/2 at k <= lambda.
        let mut lower = 0.0f64;
        let mut term = (-lambda).exp();
        if term == 0.0 {
            // exp(-lambda) underflows; accumulate the lower tail in log space.
            let mut acc = f64::NEG_INFINITY;
            for i in 0..k {
                acc = log_add(acc, log_poisson_pmf(i, lambda));
            }
            return log1m_exp(acc);
        }
        for i in 0..k {
            lower += term;
            term *= lambda / (i as f64 + 1.0);
        }
        (-lower).ln_1p()
    }
}

/// log(exp(a) + exp(b)).
pub fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// log(1 - exp(x)) for x < 0.
pub fn log1m_exp(x: f64) -> f64 {
    debug_assert!(x < 0.0);
    if x > -std::f64::consts::LN_2 {
        (-x.exp_m1()).ln()
    } else {
        (-x.exp()).ln_1p()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lgamma_matches_factorials() {
        for k in 1u64..20 {
            let fact: f64 = (1..k).map(|v| v as f64).product::<f64>().ln();
            assert!((lgamma(k as f64) - fact).abs() < 1e-10, "k={k}");
        }
    }

    #[test]
    fn log_binomial_small_cases() {
        assert!((log_binomial(0, 0).unwrap().exp() - 1.0).abs() < 1e-12);
        assert!((log_binomial(4, 2).unwrap().exp() - 6.0).abs() < 1e-10);
        assert!(log_binomial(3, 4).is_none());
        assert!(log_binomial(-1, 0).is_none());
    }

    #[test]
    fn poisson_sf_matches_direct_sum() {
        for &lambda in &[0.3, 2.0, 17.5] {
            for k in 0u64..40 {
                let direct: f64 = (k..k + 400).map(|i| log_poisson_pmf(i, lambda).exp()).sum();
                let got = log_poisson_sf_ge(k, lambda).exp();
                assert!(
                    (got - direct).abs() < 1e-12,
                    "lambda={lambda} k={k} got={got} direct={direct}"
                );
            }
        }
    }

    #[test]
    fn poisson_sf_deep_tail_stays_finite() {
        let lp = log_poisson_sf_ge(400, 1.0);
        assert!(lp.is_finite());
        // Direct tail ratio check: p(400)/P(X>=400) should be close to 1.
        assert!((log_poisson_pmf(400, 1.0) - lp).abs() < 0.01);
    }

    #[test]
    fn log_sum_exp_basic() {
        let xs = [0.0f64.ln(), 1.0f64.ln(), 2.0f64.ln()];
        assert!((log_sum_exp(&xs).exp() - 3.0).abs() < 1e-12);
        assert_eq!(log_sum_exp(&[f64::NEG_INFINITY]), f64::NEG_INFINITY);
    }
}
