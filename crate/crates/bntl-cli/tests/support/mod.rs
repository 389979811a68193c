//! Shared oracles for the acceptance suite: brute-force enumeration of
//! sequences, degree vectors, arrival times, and posteriors, plus the
//! statistical test helpers.

use std::collections::HashMap;

use statrs::distribution::{ChiSquared, ContinuousCDF};

use bntl::arrivals::log_arrival_sequence_prob;
use bntl::likelihood::log_degree_prob_given_arrivals;
use bntl::types::{ArrivalLaw, ArrivalTimes, OrderedDegrees};

/// All permutations of `0..k` (small k only).
pub fn permutations(k: u32) -> Vec<Vec<u32>> {
    fn rec(prefix: &mut Vec<u32>, rest: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if rest.is_empty() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..rest.len() {
            let v = rest.remove(i);
            prefix.push(v);
            rec(prefix, rest, out);
            prefix.pop();
            rest.insert(i, v);
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut (0..k).collect(), &mut out);
    out
}

/// All strictly increasing arrival vectors starting at 1 with entries <= n,
/// any length >= 1.
pub fn enumerate_all_times(n: u64) -> Vec<Vec<u64>> {
    let mut out = Vec::new();
    let mut current = vec![1u64];
    fn rec(current: &mut Vec<u64>, n: u64, out: &mut Vec<Vec<u64>>) {
        out.push(current.clone());
        let last = *current.last().unwrap();
        for next in last + 1..=n {
            current.push(next);
            rec(current, n, out);
            current.pop();
        }
    }
    rec(&mut current, n, &mut out);
    out
}

/// Arrival vectors of exactly `k` entries.
pub fn enumerate_times_of_len(k: usize, n: u64) -> Vec<Vec<u64>> {
    enumerate_all_times(n)
        .into_iter()
        .filter(|t| t.len() == k)
        .collect()
}

/// All end sequences of length `n` whose arrivals fall exactly at `times`.
pub fn sequences_with_times(times: &[u64], n: u64) -> Vec<Vec<u64>> {
    let mut out = Vec::new();
    let mut seq: Vec<u64> = Vec::new();
    fn rec(seq: &mut Vec<u64>, times: &[u64], n: u64, k_so_far: u64, out: &mut Vec<Vec<u64>>) {
        let step = seq.len() as u64 + 1;
        if step > n {
            if k_so_far == times.len() as u64 {
                out.push(seq.clone());
            }
            return;
        }
        let is_arrival = (k_so_far as usize) < times.len() && times[k_so_far as usize] == step;
        if is_arrival {
            seq.push(k_so_far + 1);
            rec(seq, times, n, k_so_far + 1, out);
            seq.pop();
        } else {
            for v in 1..=k_so_far {
                seq.push(v);
                rec(seq, times, n, k_so_far, out);
                seq.pop();
            }
        }
    }
    rec(&mut seq, times, n, 0, &mut out);
    out
}

/// All feasible ordered degree vectors summing to `n` for fixed `times`.
pub fn degree_vectors_with_times(times: &[u64], n: u64) -> Vec<Vec<u64>> {
    let k = times.len();
    let mut out = Vec::new();
    let mut degrees: Vec<u64> = Vec::new();
    fn rec(
        degrees: &mut Vec<u64>,
        times: &[u64],
        n: u64,
        sum: u64,
        out: &mut Vec<Vec<u64>>,
    ) {
        let k = times.len();
        let j = degrees.len();
        if j == k {
            if sum == n {
                out.push(degrees.clone());
            }
            return;
        }
        // Feasibility for the NEXT arrival: cumsum up to j+1 must reach
        // T_{j+2} - 1 eventually; prune by remaining budget.
        let remaining_vertices = (k - j - 1) as u64;
        for d in 1..=(n - sum - remaining_vertices) {
            // The cumulative constraint at the next arrival (if any):
            // T_{j+2} - 1 <= sum + d must still be satisfiable later, but
            // since later degrees only add, only the immediate constraint
            // matters when placing vertex j+2.
            if j + 1 < k && sum + d < times[j + 1] - 1 {
                continue;
            }
            degrees.push(d);
            rec(degrees, times, n, sum + d, out);
            degrees.pop();
        }
    }
    rec(&mut degrees, times, n, 0, &mut out);
    let _ = k;
    out
}

/// Exact posterior over `(sigma, times)` for an unlabeled observation with
/// fixed discount and arrival law.
pub fn exact_sigma_t_posterior(
    degrees_by_external: &[u64],
    alpha: f64,
    law: &ArrivalLaw,
    n: u64,
) -> HashMap<(Vec<u32>, Vec<u64>), f64> {
    let k = degrees_by_external.len();
    let mut weights = HashMap::new();
    let mut total = 0.0f64;
    for sigma in permutations(k as u32) {
        let ordered: Vec<u64> = sigma
            .iter()
            .map(|&e| degrees_by_external[e as usize])
            .collect();
        let d = OrderedDegrees::new(ordered).unwrap();
        for times in enumerate_times_of_len(k, n) {
            let t = ArrivalTimes::new(times.clone()).unwrap();
            if !bntl::types::validate_feasible(&d, &t) {
                continue;
            }
            let lp = match log_degree_prob_given_arrivals(&d, &t, alpha) {
                Ok(v) => v,
                Err(_) => continue,
            } + log_arrival_sequence_prob(law, &t, n).unwrap();
            let w = lp.exp();
            total += w;
            weights.insert((sigma.clone(), times), w);
        }
    }
    for w in weights.values_mut() {
        *w /= total;
    }
    weights
}

/// Total-variation distance between an empirical count map and exact
/// probabilities.
pub fn tv_distance<K: std::hash::Hash + Eq + Clone>(
    counts: &HashMap<K, u64>,
    exact: &HashMap<K, f64>,
    total: u64,
) -> f64 {
    let mut keys: std::collections::HashSet<K> = counts.keys().cloned().collect();
    keys.extend(exact.keys().cloned());
    let mut tv = 0.0;
    for key in keys {
        let p = counts.get(&key).copied().unwrap_or(0) as f64 / total as f64;
        let q = exact.get(&key).copied().unwrap_or(0.0);
        tv += (p - q).abs();
    }
    tv / 2.0
}

/// Chi-square goodness-of-fit p-value; cells with expected count below 5
/// are pooled into one bucket.
pub fn chi_square_p<K: std::hash::Hash + Eq + Clone>(
    counts: &HashMap<K, u64>,
    exact: &HashMap<K, f64>,
    total: u64,
) -> f64 {
    let mut stat = 0.0f64;
    let mut pooled_obs = 0.0f64;
    let mut pooled_exp = 0.0f64;
    let mut cells = 0usize;
    for (key, &p) in exact {
        let expected = p * total as f64;
        let observed = counts.get(key).copied().unwrap_or(0) as f64;
        if expected < 5.0 {
            pooled_obs += observed;
            pooled_exp += expected;
        } else {
            stat += (observed - expected).powi(2) / expected;
            cells += 1;
        }
    }
    if pooled_exp > 0.0 {
        stat += (pooled_obs - pooled_exp).powi(2) / pooled_exp;
        cells += 1;
    }
    if cells < 2 {
        return 1.0;
    }
    let df = (cells - 1) as f64;
    let dist = ChiSquared::new(df).unwrap();
    1.0 - dist.cdf(stat)
}

/// Two-sided Kolmogorov-Smirnov p-value of samples against a CDF.
pub fn ks_p(samples: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = samples.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in samples.iter().enumerate() {
        let f = cdf(x);
        let lo = i as f64 / n;
        let hi = (i as f64 + 1.0) / n;
        d = d.max((f - lo).abs()).max((hi - f).abs());
    }
    let lambda = (n.sqrt() + 0.12 + 0.11 / n.sqrt()) * d;
    kolmogorov_q(lambda)
}

fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda < 1e-8 {
        return 1.0;
    }
    let mut q = 0.0f64;
    for k in 1..=100 {
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        q += sign * (-2.0 * (k as f64 * lambda).powi(2)).exp();
    }
    (2.0 * q).clamp(0.0, 1.0)
}
