//! Closed-form BNTL log-likelihood kernels: the probability of one
//! edge-end sequence given arrival times, the joint with explicit stick
//! weights, the degree-sequence probability with its binomial sequence
//! counts, and the full likelihood with the arrival factor attached.

use serde::{Deserialize, Serialize};

use crate::arrivals::{log_arrival_sequence_prob, log_pmf, log_survival};
use crate::error::{Error, Result};
use crate::math::{lbeta, lgamma, log_binomial};
use crate::types::{ArrivalLaw, ArrivalTimes, BntlModel, InterarrivalModel, OrderedDegrees,
    validate_feasible};

/// Stick weights `Ψ_1..Ψ_K` with `Ψ_1 = 1` exactly and the rest in `(0,1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StickWeights {
    psi: Vec<f64>,
}

impl StickWeights {
    pub fn new(psi: Vec<f64>) -> Result<Self> {
        if psi.is_empty() {
            return Err(Error::EmptySequence);
        }
        if psi[0] != 1.0 {
            return Err(Error::ParamOutOfRange {
                name: "psi_1",
                value: psi[0],
                expected: "exactly 1",
            });
        }
        for (i, &p) in psi.iter().enumerate().skip(1) {
            if !(p > 0.0 && p < 1.0) {
                return Err(Error::ParamOutOfRange {
                    name: "psi_j",
                    value: p,
                    expected: "(0, 1) for j >= 2",
                });
            }
            let _ = i;
        }
        Ok(Self { psi })
    }

    pub fn values(&self) -> &[f64] {
        &self.psi
    }

    pub fn k(&self) -> usize {
        self.psi.len()
    }
}

fn require_feasible(d: &OrderedDegrees, t: &ArrivalTimes) -> Result<()> {
    if !validate_feasible(d, t) {
        return Err(Error::Infeasible {
            reason: "degree/arrival pair violates the cumulative constraint".into(),
        });
    }
    Ok(())
}

fn require_alpha(alpha: f64) -> Result<()> {
    if !(alpha < 1.0) {
        return Err(Error::ParamOutOfRange {
            name: "alpha",
            value: alpha,
            expected: "(-inf, 1)",
        });
    }
    Ok(())
}

/// Log-probability of one specific edge-end sequence consistent with
/// `(d, T)`:
///
/// `log Γ(d_1−α) − log Γ(n−Kα)
///   + Σ_{j≥2} [log Γ(T_j−jα) + log Γ(d_j−α) − log Γ(T_j−1−(j−1)α) − log Γ(1−α)]`
pub fn log_seq_prob_given_arrivals(
    d: &OrderedDegrees,
    t: &ArrivalTimes,
    alpha: f64,
) -> Result<f64> {
    require_alpha(alpha)?;
    require_feasible(d, t)?;
    Ok(log_seq_prob_slices(d.degrees(), t.times(), alpha))
}

/// Same kernel on raw slices for sampler hot paths; callers guarantee
/// feasibility and `alpha < 1`.
pub(crate) fn log_seq_prob_slices(degrees: &[u64], times: &[u64], alpha: f64) -> f64 {
    let k = degrees.len();
    let n: u64 = degrees.iter().sum();
    let lg_one_minus_alpha = lgamma(1.0 - alpha);
    let mut total =
        lgamma(degrees[0] as f64 - alpha) - lgamma(n as f64 - k as f64 * alpha);
    for j in 2..=k {
        let tj = times[j - 1] as f64;
        let dj = degrees[j - 1] as f64;
        let jf = j as f64;
        total += lgamma(tj - jf * alpha) + lgamma(dj - alpha)
            - lgamma(tj - 1.0 - (jf - 1.0) * alpha)
            - lg_one_minus_alpha;
    }
    total
}

/// Degree-level kernel on raw slices: sequence factor plus sequence-count
/// binomials, `-inf` on zero-mass states.
pub(crate) fn log_degree_prob_slices(
    degrees: &[u64],
    cumsums: &[u64],
    times: &[u64],
    alpha: f64,
) -> f64 {
    let mut total = log_seq_prob_slices(degrees, times, alpha);
    for j in 2..=degrees.len() {
        let m = cumsums[j - 1] as i64 - times[j - 1] as i64;
        let r = degrees[j - 1] as i64 - 1;
        match log_binomial(m, r) {
            Some(lb) => total += lb,
            None => return f64::NEG_INFINITY,
        }
    }
    total
}

/// Joint log-probability of the sequence and explicit stick weights,
/// including the interarrival factors and the censored final term.
pub fn log_joint_with_psi(
    d: &OrderedDegrees,
    t: &ArrivalTimes,
    psi: &StickWeights,
    alpha: f64,
    law: &ArrivalLaw,
    n: u64,
) -> Result<f64> {
    require_alpha(alpha)?;
    require_feasible(d, t)?;
    let k = d.k();
    if psi.k() != k {
        return Err(Error::LengthMismatch {
            what: "stick weights",
            got: psi.k(),
            expected: k,
        });
    }
    if t.last() > n {
        return Err(Error::Infeasible {
            reason: format!("T_K = {} exceeds n = {n}", t.last()),
        });
    }
    let degrees = d.degrees();
    let cums = d.cumsums();
    let times = t.times();
    let psis = psi.values();
    let mut total = 0.0;
    for j in 2..=k {
        let jf = j as f64;
        let dj = degrees[j - 1] as f64;
        let dbar_prev = cums[j - 2] as f64;
        let tj = times[j - 1] as f64;
        let p = psis[j - 1];
        total += (dj - alpha - 1.0) * p.ln()
            + (dbar_prev - (jf - 1.0) * alpha - 1.0) * (1.0 - p).ln()
            - lbeta(1.0 - alpha, tj - 1.0 - (jf - 1.0) * alpha);
        total += log_pmf(law, j as u64 - 1, times[j - 1] - times[j - 2], times[j - 2])?;
    }
    total += log_survival(law, n - t.last(), k as u64, t.last())?;
    Ok(total)
}

/// Log-probability of the arrival-ordered degree sequence given `T`: the
/// sequence probability times the number of edge-end sequences realizing it,
/// `Σ_{j≥2} log C(d̄_j − T_j, d_j − 1)`.
pub fn log_degree_prob_given_arrivals(
    d: &OrderedDegrees,
    t: &ArrivalTimes,
    alpha: f64,
) -> Result<f64> {
    require_alpha(alpha)?;
    require_feasible(d, t)?;
    let lp = log_degree_prob_slices(d.degrees(), d.cumsums(), t.times(), alpha);
    if lp == f64::NEG_INFINITY {
        return Err(Error::ZeroMass {
            reason: "undefined sequence-count binomial",
        });
    }
    Ok(lp)
}

/// Full log-likelihood of `(d, T)` under a BNTL model: the sequence factor
/// at the model's discount plus the arrival-sequence factor (with censoring).
/// The coupled PYP variant is evaluated through its own closed form.
pub fn log_full_likelihood(
    d: &OrderedDegrees,
    t: &ArrivalTimes,
    model: &BntlModel,
    n: u64,
) -> Result<f64> {
    if d.n() != n {
        return Err(Error::LengthMismatch {
            what: "total ends",
            got: d.n() as usize,
            expected: n as usize,
        });
    }
    match model.arrivals {
        InterarrivalModel::CoupledPyp { theta } => {
            require_feasible(d, t)?;
            log_coupled_pyp_likelihood(d, t, theta, model.alpha, n)
        }
        _ => {
            let seq = log_seq_prob_given_arrivals(d, t, model.alpha)?;
            let arr = log_arrival_sequence_prob(&model.law(), t, n)?;
            Ok(seq + arr)
        }
    }
}

/// Closed-form coupled-PYP sequence likelihood:
///
/// `log Γ(1+θ) − log Γ(n+θ) + Σ_{j=1}^{K−1} log(θ+jτ)
///   + Σ_j [log Γ(d_j−τ) − log Γ(1−τ)]`
///
/// Algebraically equal to the sequence factor at `α = τ` plus the
/// PYP-induced arrival factor.
pub fn log_coupled_pyp_likelihood(
    d: &OrderedDegrees,
    t: &ArrivalTimes,
    theta: f64,
    tau: f64,
    n: u64,
) -> Result<f64> {
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
    require_feasible(d, t)?;
    if t.last() > n {
        return Err(Error::Infeasible {
            reason: format!("T_K = {} exceeds n = {n}", t.last()),
        });
    }
    let k = d.k();
    let mut total = lgamma(1.0 + theta) - lgamma(n as f64 + theta);
    for j in 1..k {
        total += (theta + j as f64 * tau).ln();
    }
    let lg_one_minus_tau = lgamma(1.0 - tau);
    for &deg in d.degrees() {
        total += lgamma(deg as f64 - tau) - lg_one_minus_tau;
    }
    Ok(total)
}
