//! Evaluation quantities: predictive log-likelihood (plug-in and posterior
//! averaged), the arrival-slack statistic, plug-in power-law exponents,
//! mean interarrival time, degree histograms, arrival curves, and
//! effective-sample-size factors.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::likelihood::log_full_likelihood;
use crate::math::log_sum_exp;
use crate::types::{
    degrees_from_ends, ArrivalTimes, BntlModel, EdgeEndSequence, InterarrivalModel,
    OrderedDegrees, UnlabeledObservation,
};

/// One posterior sample of the latent structure and parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PosteriorDraw {
    /// Arrival slot -> external vertex id.
    pub sigma: Vec<u32>,
    pub times: Vec<u64>,
    pub alpha: f64,
    pub arrivals: InterarrivalModel,
}

/// Plug-in predictive log-likelihood of `test` given `train`, evaluated as
/// the full-likelihood difference at fixed parameters. The test ends must
/// continue the train sequence's canonical labeling.
pub fn predictive_loglik_mle(
    train: &EdgeEndSequence,
    test: &[u64],
    model: &BntlModel,
) -> Result<f64> {
    if test.is_empty() {
        return Ok(0.0);
    }
    let mut combined = train.ends().to_vec();
    combined.extend_from_slice(test);
    let combined = EdgeEndSequence::new(combined)?;
    let (d_full, t_full) = degrees_from_ends(&combined);
    let (d_train, t_train) = degrees_from_ends(train);
    let full = log_full_likelihood(&d_full, &t_full, model, combined.len() as u64)?;
    let head = log_full_likelihood(&d_train, &t_train, model, train.len() as u64)?;
    Ok(full - head)
}

/// A test end relative to an unlabeled training graph: either a training
/// vertex (by external id) or the i-th new vertex appearing in the test
/// stretch.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TestEnd {
    Train(u32),
    TestVertex(u32),
}

/// Translates test ends in whole-sequence canonical labels into [`TestEnd`]s
/// given the training prefix size and the external id of each training
/// arrival slot (the relabeling used when the training order was forgotten).
pub fn classify_test_ends(
    test: &[u64],
    k_train: u64,
    external_of_train_arrival: &[u32],
) -> Result<Vec<TestEnd>> {
    if external_of_train_arrival.len() != k_train as usize {
        return Err(Error::LengthMismatch {
            what: "train arrival map",
            got: external_of_train_arrival.len(),
            expected: k_train as usize,
        });
    }
    let mut out = Vec::with_capacity(test.len());
    let mut seen_new = 0u64;
    for &c in test {
        if c == 0 {
            return Err(Error::MalformedLabeling {
                position: out.len(),
                found: 0,
                expected: 1,
            });
        }
        if c <= k_train {
            out.push(TestEnd::Train(external_of_train_arrival[c as usize - 1]));
        } else {
            let idx = c - k_train - 1;
            if idx > seen_new {
                return Err(Error::MalformedLabeling {
                    position: out.len(),
                    found: c,
                    expected: k_train + seen_new + 1,
                });
            }
            seen_new = seen_new.max(idx + 1);
            out.push(TestEnd::TestVertex(idx as u32));
        }
    }
    Ok(out)
}

/// Posterior predictive log-likelihood: log of the posterior average of the
/// per-draw continuation probability, each continuation seeded by that
/// draw's `(σ, T, α, φ)`.
pub fn predictive_loglik_posterior(
    draws: &[PosteriorDraw],
    obs: &UnlabeledObservation,
    test: &[TestEnd],
    n_train: u64,
) -> Result<f64> {
    if draws.is_empty() {
        return Err(Error::InsufficientData("no posterior draws".into()));
    }
    if test.is_empty() {
        return Ok(0.0);
    }
    let k = obs.k();
    let mut per_draw = Vec::with_capacity(draws.len());
    for draw in draws {
        if draw.sigma.len() != k || draw.times.len() != k {
            return Err(Error::LengthMismatch {
                what: "posterior draw",
                got: draw.sigma.len(),
                expected: k,
            });
        }
        let mut slot_of_external = vec![u32::MAX; k];
        for (slot, &e) in draw.sigma.iter().enumerate() {
            slot_of_external[e as usize] = slot as u32;
        }
        let mut degrees: Vec<u64> = draw
            .sigma
            .iter()
            .map(|&e| obs.degrees()[e as usize])
            .collect();
        let mut times = draw.times.clone();
        let train_d = OrderedDegrees::new(degrees.clone())?;
        let train_t = ArrivalTimes::new(times.clone())?;
        let model = BntlModel::new(draw.alpha, draw.arrivals)?;
        let head = log_full_likelihood(&train_d, &train_t, &model, n_train)?;

        let mut new_slot: Vec<usize> = Vec::new();
        for (i, end) in test.iter().enumerate() {
            let pos = n_train + i as u64 + 1;
            match *end {
                TestEnd::Train(e) => {
                    degrees[slot_of_external[e as usize] as usize] += 1;
                }
                TestEnd::TestVertex(v) => {
                    let v = v as usize;
                    if v == new_slot.len() {
                        new_slot.push(degrees.len());
                        degrees.push(1);
                        times.push(pos);
                    } else {
                        degrees[new_slot[v]] += 1;
                    }
                }
            }
        }
        let n_total = n_train + test.len() as u64;
        let full_d = OrderedDegrees::new(degrees)?;
        let full_t = ArrivalTimes::new(times)?;
        let full = log_full_likelihood(&full_d, &full_t, &model, n_total)?;
        per_draw.push(full - head);
    }
    Ok(log_sum_exp(&per_draw) - (draws.len() as f64).ln())
}

/// Mean arrival slack `S = (1/(K−1)) Σ_{j≥2} (d̄_{j−1} − T_j)`.
pub fn s_statistic(d: &OrderedDegrees, t: &ArrivalTimes) -> Result<f64> {
    let k = d.k();
    if k < 2 || t.k() != k {
        return Err(Error::InsufficientData(
            "S statistic needs K >= 2 matching vertices".into(),
        ));
    }
    let mut acc = 0.0;
    for j in 2..=k {
        acc += d.cumsums()[j - 2] as f64 - t.times()[j - 1] as f64;
    }
    Ok(acc / (k as f64 - 1.0))
}

/// Mean interarrival time `(T_K − T_1)/(K − 1)`.
pub fn mean_interarrival(t: &ArrivalTimes) -> Result<f64> {
    if t.k() < 2 {
        return Err(Error::InsufficientData(
            "mean interarrival needs K >= 2".into(),
        ));
    }
    Ok((t.last() as f64 - 1.0) / (t.k() as f64 - 1.0))
}

/// Plug-in asymptotic degree exponent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum EtaEstimate {
    Value(f64),
    /// The asymptotic degree distribution of the uncoupled PYP-induced
    /// arrival model is not known.
    UndefinedUncoupledPyp,
}

impl EtaEstimate {
    pub fn value(&self) -> Option<f64> {
        match self {
            EtaEstimate::Value(v) => Some(*v),
            EtaEstimate::UndefinedUncoupledPyp => None,
        }
    }
}

/// Plug-in exponent: `1 + τ̂` for the coupled PYP, and
/// `1 + (μ̂ − α̂)/(μ̂ − 1)` for finite-mean interarrival families with
/// `μ̂ = 1/β̂` (geometric) or `1 + λ̂` (shifted Poisson).
pub fn eta_plugin(model: &BntlModel) -> Result<EtaEstimate> {
    let mu = match model.arrivals {
        InterarrivalModel::CoupledPyp { .. } => {
            return Ok(EtaEstimate::Value(1.0 + model.alpha));
        }
        InterarrivalModel::PypInduced { .. } => {
            return Ok(EtaEstimate::UndefinedUncoupledPyp);
        }
        InterarrivalModel::Geometric { beta } => 1.0 / beta,
        InterarrivalModel::ShiftedPoisson { lambda } => 1.0 + lambda,
    };
    if !(mu > 1.0) {
        return Err(Error::Domain(format!(
            "mean interarrival {mu} <= 1: every step an arrival"
        )));
    }
    Ok(EtaEstimate::Value(1.0 + (mu - model.alpha) / (mu - 1.0)))
}

/// Exact degree histogram `m(d)`, sorted by degree.
pub fn degree_histogram(d: &OrderedDegrees) -> Vec<(u64, u64)> {
    let mut map = std::collections::BTreeMap::new();
    for &deg in d.degrees() {
        *map.entry(deg).or_insert(0u64) += 1;
    }
    map.into_iter().collect()
}

/// Vertex count as a step function of the end index: one `(T_j, j)` row per
/// vertex.
pub fn arrival_curve(t: &ArrivalTimes) -> Vec<(u64, u64)> {
    t.times()
        .iter()
        .enumerate()
        .map(|(i, &tj)| (tj, i as u64 + 1))
        .collect()
}

/// Effective-sample-size factor (ESS/N) of a scalar trace.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct EssFactor {
    pub factor: f64,
    /// Set when the trace was constant; the factor is reported as 0.
    pub constant_trace: bool,
}

/// Initial-positive-sequence estimator of ESS/N, clipped to (0, 1].
pub fn ess_factor(trace: &[f64]) -> Result<EssFactor> {
    let n = trace.len();
    if n < 10 {
        return Err(Error::InsufficientData(format!(
            "ESS needs a trace of length >= 10, got {n}"
        )));
    }
    let mean = trace.iter().sum::<f64>() / n as f64;
    let var = trace.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
    if var <= 0.0 || !var.is_finite() {
        return Ok(EssFactor {
            factor: 0.0,
            constant_trace: true,
        });
    }
    let rho = |lag: usize| -> f64 {
        let mut acc = 0.0;
        for i in 0..n - lag {
            acc += (trace[i] - mean) * (trace[i + lag] - mean);
        }
        acc / (n as f64 * var)
    };
    // Geyer pairs: add rho_{2m-1} + rho_{2m} while positive.
    let mut tau = 1.0;
    let mut m = 1usize;
    while 2 * m < n {
        let pair = rho(2 * m - 1) + rho(2 * m);
        if pair <= 0.0 {
            break;
        }
        tau += 2.0 * pair;
        m += 1;
    }
    Ok(EssFactor {
        factor: (1.0 / tau).min(1.0),
        constant_trace: false,
    })
}
