//! Forward samplers: the BNTL predictive rule, the stick-breaking
//! construction, and reference Pitman–Yor / Yule–Simon urns used for
//! equivalence testing.

use rand::Rng;
use rand_distr::{Beta as BetaDist, Distribution};

use crate::arrivals::sample_interarrival;
use crate::error::{Error, Result};
use crate::likelihood::StickWeights;
use crate::types::{ArrivalTimes, BntlModel, EdgeEndSequence, OrderedDegrees};

/// A sampled trace: the edge-end sequence, its arrival times, and the stick
/// weights when the stick construction produced it.
#[derive(Debug, Clone)]
pub struct GeneratedTrace {
    pub ends: EdgeEndSequence,
    pub times: ArrivalTimes,
    pub psi: Option<StickWeights>,
}

impl GeneratedTrace {
    pub fn ordered_degrees(&self) -> OrderedDegrees {
        crate::types::degrees_from_ends(&self.ends).0
    }
}

/// Fenwick tree over per-vertex weights, supporting O(log K) categorical
/// draws under incremental weight updates.
struct WeightIndex {
    tree: Vec<f64>,
}

impl WeightIndex {
    fn new() -> Self {
        Self { tree: Vec::new() }
    }

    fn push(&mut self, w: f64) {
        // Appending index i (1-based) must fold in the trailing partial sums
        // it covers.
        let i = self.tree.len() + 1;
        let mut v = w;
        let lsb = i & i.wrapping_neg();
        let mut step = 1usize;
        while step < lsb {
            v += self.tree[i - 1 - step];
            step <<= 1;
        }
        self.tree.push(v);
    }

    fn add(&mut self, idx: usize, delta: f64) {
        let mut i = idx + 1;
        while i <= self.tree.len() {
            self.tree[i - 1] += delta;
            i += i & i.wrapping_neg();
        }
    }

    /// Index of the smallest prefix whose cumulative weight exceeds `target`.
    fn find(&self, mut target: f64) -> usize {
        let n = self.tree.len();
        let mut pos = 0usize;
        let mut step = n.next_power_of_two();
        while step > 0 {
            let next = pos + step;
            if next <= n && self.tree[next - 1] <= target {
                target -= self.tree[next - 1];
                pos = next;
            }
            step >>= 1;
        }
        pos.min(n - 1)
    }
}

/// Samples a BNTL trace through the predictive rule: a new vertex appears
/// exactly at its (lazily drawn) arrival time, otherwise an existing vertex
/// is reinforced with probability proportional to `d_j − α`.
pub fn sample_predictive<R: Rng + ?Sized>(
    model: &BntlModel,
    n: u64,
    rng: &mut R,
) -> Result<GeneratedTrace> {
    if n == 0 {
        return Err(Error::EmptySequence);
    }
    let alpha = model.alpha;
    let law = model.law();
    let mut ends: Vec<u64> = Vec::with_capacity(n as usize);
    let mut degrees: Vec<u64> = Vec::new();
    let mut times: Vec<u64> = Vec::new();
    let mut weights = WeightIndex::new();

    let arrive = |step: u64,
                      ends: &mut Vec<u64>,
                      degrees: &mut Vec<u64>,
                      times: &mut Vec<u64>,
                      weights: &mut WeightIndex| {
        degrees.push(1);
        times.push(step);
        weights.push(1.0 - alpha);
        ends.push(degrees.len() as u64);
    };

    arrive(1, &mut ends, &mut degrees, &mut times, &mut weights);
    let mut next_arrival = 1 + sample_interarrival(&law, 1, 1, rng)?;

    for step in 2..=n {
        if step == next_arrival {
            arrive(step, &mut ends, &mut degrees, &mut times, &mut weights);
            let k = degrees.len() as u64;
            next_arrival = step + sample_interarrival(&law, k, step, rng)?;
        } else {
            let total = (step as f64 - 1.0) - degrees.len() as f64 * alpha;
            let target = rng.random::<f64>() * total;
            let j = weights.find(target);
            degrees[j] += 1;
            weights.add(j, 1.0);
            ends.push(j as u64 + 1);
        }
    }

    Ok(GeneratedTrace {
        ends: EdgeEndSequence::new(ends)?,
        times: ArrivalTimes::new(times)?,
        psi: None,
    })
}

/// Samples a BNTL trace through the stick construction: at each arrival
/// `Ψ_j ~ Beta(1−α, T_j−1−(j−1)α)` rescales the categorical table, and
/// non-arrival steps draw from `P_{j,K} = Ψ_j Π_{ℓ>j}(1−Ψ_ℓ)`.
pub fn sample_stick<R: Rng + ?Sized>(
    model: &BntlModel,
    n: u64,
    rng: &mut R,
) -> Result<GeneratedTrace> {
    if n == 0 {
        return Err(Error::EmptySequence);
    }
    let alpha = model.alpha;
    let law = model.law();
    let mut ends: Vec<u64> = Vec::with_capacity(n as usize);
    let mut times: Vec<u64> = vec![1];
    let mut psi: Vec<f64> = vec![1.0];
    // prefix[j] = sum_{l <= j+1, l >= 2} ln(1 - psi_l); the categorical CDF at
    // vertex j is exp(prefix[K-1] - prefix[j-1]).
    let mut prefix: Vec<f64> = vec![0.0];
    ends.push(1);

    let mut next_arrival = 1 + sample_interarrival(&law, 1, 1, rng)?;

    for step in 2..=n {
        if step == next_arrival {
            let j = times.len() + 1; // this vertex's arrival index
            let b = step as f64 - 1.0 - (j as f64 - 1.0) * alpha;
            let p = BetaDist::new(1.0 - alpha, b)
                .map_err(|_| {
                    Error::Numeric(format!("Beta(1-alpha, {b}) is not samplable"))
                })?
                .sample(rng);
            let p = p.clamp(1e-15, 1.0 - 1e-15);
            psi.push(p);
            prefix.push(prefix.last().unwrap() + (1.0 - p).ln());
            times.push(step);
            ends.push(times.len() as u64);
            next_arrival = step + sample_interarrival(&law, times.len() as u64, step, rng)?;
        } else {
            let s_k = *prefix.last().unwrap();
            let u: f64 = 1.0 - rng.random::<f64>(); // (0, 1]
            let threshold = s_k - u.ln();
            // Smallest j with prefix[j-1] <= threshold; prefix is decreasing.
            let idx = prefix.partition_point(|&s| s > threshold);
            ends.push(idx as u64 + 1);
        }
    }

    Ok(GeneratedTrace {
        ends: EdgeEndSequence::new(ends)?,
        times: ArrivalTimes::new(times)?,
        psi: Some(StickWeights::new(psi)?),
    })
}

/// Reference Pitman–Yor urn: a new vertex with probability
/// `(θ + Kτ)/(n + θ)`, otherwise vertex `j` with probability
/// `(d_j − τ)/(n + θ)`.
pub fn sample_pyp_reference<R: Rng + ?Sized>(
    theta: f64,
    tau: f64,
    n: u64,
    rng: &mut R,
) -> Result<EdgeEndSequence> {
    if !(tau > 0.0 && tau < 1.0) {
        return Err(Error::ParamOutOfRange {
            name: "tau",
            value: tau,
            expected: "(0, 1)",
        });
    }
    if !(theta > -tau) {
        return Err(Error::ParamOutOfRange {
            name: "theta",
            value: theta,
            expected: "(-tau, inf)",
        });
    }
    if n == 0 {
        return Err(Error::EmptySequence);
    }
    let mut ends: Vec<u64> = vec![1];
    let mut k = 1u64;
    let mut weights = WeightIndex::new();
    weights.push(1.0 - tau);
    for step in 1..n {
        let m = step as f64; // ends so far
        let p_new = (theta + k as f64 * tau) / (m + theta);
        if rng.random::<f64>() < p_new {
            k += 1;
            weights.push(1.0 - tau);
            ends.push(k);
        } else {
            let total = m - k as f64 * tau;
            let j = weights.find(rng.random::<f64>() * total);
            weights.add(j, 1.0);
            ends.push(j as u64 + 1);
        }
    }
    EdgeEndSequence::new(ends)
}

/// Reference Yule–Simon urn: a new vertex with probability `β`, otherwise
/// vertex `j` with probability proportional to its degree.
pub fn sample_ys_reference<R: Rng + ?Sized>(
    beta: f64,
    n: u64,
    rng: &mut R,
) -> Result<EdgeEndSequence> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::ParamOutOfRange {
            name: "beta",
            value: beta,
            expected: "(0, 1)",
        });
    }
    if n == 0 {
        return Err(Error::EmptySequence);
    }
    let mut ends: Vec<u64> = vec![1];
    let mut k = 1u64;
    let mut weights = WeightIndex::new();
    weights.push(1.0);
    for step in 1..n {
        if rng.random::<f64>() < beta {
            k += 1;
            weights.push(1.0);
            ends.push(k);
        } else {
            let j = weights.find(rng.random::<f64>() * step as f64);
            weights.add(j, 1.0);
            ends.push(j as u64 + 1);
        }
    }
    EdgeEndSequence::new(ends)
}
