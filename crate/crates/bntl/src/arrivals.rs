//! The arrival-time law: interarrival pmf and survival, sampling, conjugate
//! and slice posterior updates, and closed-form or numerical MLEs, under a
//! Markov factorization of the arrival sequence.
//!
//! Index convention: `arrived` is the number of vertices already present, so
//! `log_pmf(law, j, s, t_prev)` is the probability that vertex `j + 1` first
//! appears `s` steps after the previous arrival at `t_prev`.

use rand::Rng;
use rand_distr::{Beta as BetaDist, Distribution, Gamma as GammaDist, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::{lgamma, log_poisson_pmf, log_poisson_sf_ge, log_sum_exp};
use crate::opt;
use crate::slice::slice_sample;
use crate::types::{ArrivalLaw, ArrivalTimes, InterarrivalModel};

/// Lower cutoff keeping optimizer iterates strictly inside open parameter
/// ranges.
pub const PARAM_EPS: f64 = 1e-6;

/// Upper bound for theta in arrival-only optimization and slice updates.
pub const THETA_MAX_DEFAULT: f64 = 1e4;

/// Log-probability of interarrival `s >= 1` for the next vertex.
pub fn log_pmf(law: &ArrivalLaw, arrived: u64, s: u64, t_prev: u64) -> Result<f64> {
    if s == 0 {
        return Err(Error::Domain("interarrival must be >= 1".into()));
    }
    match *law {
        ArrivalLaw::Geometric { beta } => Ok(beta.ln() + (s as f64 - 1.0) * (1.0 - beta).ln()),
        ArrivalLaw::ShiftedPoisson { lambda } => Ok(log_poisson_pmf(s - 1, lambda)),
        ArrivalLaw::Pyp { theta, tau } => {
            let j = arrived as f64;
            let t = t_prev as f64;
            let sf = s as f64;
            if arrived == 0 || t_prev == 0 {
                return Err(Error::Domain(
                    "PYP interarrival needs arrived >= 1 and t_prev >= 1".into(),
                ));
            }
            if t - j * tau <= 0.0 {
                return Err(Error::Domain(format!(
                    "infeasible PYP state: t_prev - j*tau = {} <= 0",
                    t - j * tau
                )));
            }
            Ok((theta + j * tau).ln() + lgamma(theta + t) - lgamma(theta + t + sf)
                + lgamma(t + sf - 1.0 - j * tau)
                - lgamma(t - j * tau))
        }
    }
}

/// Log-probability of the event `Δ > s` for the next vertex; `s = 0` gives 0.
pub fn log_survival(law: &ArrivalLaw, s: u64, arrived: u64, t_prev: u64) -> Result<f64> {
    if s == 0 {
        return Ok(0.0);
    }
    match *law {
        ArrivalLaw::Geometric { beta } => Ok(s as f64 * (1.0 - beta).ln()),
        ArrivalLaw::ShiftedPoisson { lambda } => {
            // Δ > s  <=>  Δ - 1 >= s.
            Ok(log_poisson_sf_ge(s, lambda))
        }
        ArrivalLaw::Pyp { theta, tau } => {
            let j = arrived as f64;
            let t = t_prev as f64;
            let sf = s as f64;
            if arrived == 0 || t_prev == 0 {
                return Err(Error::Domain(
                    "PYP survival needs arrived >= 1 and t_prev >= 1".into(),
                ));
            }
            if t - j * tau <= 0.0 {
                return Err(Error::Domain(format!(
                    "infeasible PYP state: t_prev - j*tau = {} <= 0",
                    t - j * tau
                )));
            }
            Ok(lgamma(t + sf - j * tau) - lgamma(t - j * tau) + lgamma(t + theta)
                - lgamma(t + sf + theta))
        }
    }
}

/// Draws an interarrival distributed per [`log_pmf`].
pub fn sample_interarrival<R: Rng + ?Sized>(
    law: &ArrivalLaw,
    arrived: u64,
    t_prev: u64,
    rng: &mut R,
) -> Result<u64> {
    match *law {
        ArrivalLaw::Geometric { beta } => {
            let u = 1.0 - rng.random::<f64>(); // (0, 1]
            let s = 1 + (u.ln() / (1.0 - beta).ln()).floor() as u64;
            Ok(s.max(1))
        }
        ArrivalLaw::ShiftedPoisson { lambda } => {
            let p = Poisson::new(lambda).map_err(|_| Error::ParamOutOfRange {
                name: "lambda",
                value: lambda,
                expected: "(0, inf)",
            })?;
            let x: f64 = p.sample(rng);
            Ok(1 + x as u64)
        }
        ArrivalLaw::Pyp { theta, tau } => {
            // Per-step arrival simulation of the urn's new-vertex probability.
            let j = arrived as f64;
            let mut s = 1u64;
            loop {
                let m = (t_prev + s - 1) as f64; // ends present before this step
                let p_arrive = (theta + j * tau) / (m + theta);
                if rng.random::<f64>() < p_arrive {
                    return Ok(s);
                }
                s += 1;
            }
        }
    }
}

/// Log-probability of the full observed arrival sequence, including the
/// censored probability that vertex `K + 1` has not arrived by step `n`.
pub fn log_arrival_sequence_prob(law: &ArrivalLaw, t: &ArrivalTimes, n: u64) -> Result<f64> {
    if t.last() > n {
        return Err(Error::Infeasible {
            reason: format!("T_K = {} exceeds n = {n}", t.last()),
        });
    }
    let times = t.times();
    let k = times.len();
    let mut total = 0.0;
    for j in 1..k {
        total += log_pmf(law, j as u64, times[j] - times[j - 1], times[j - 1])?;
    }
    total += log_survival(law, n - times[k - 1], k as u64, times[k - 1])?;
    Ok(total)
}

/// Slice-level arrival probability used in sampler hot paths; domain errors
/// map to `-inf` (zero mass).
pub(crate) fn arrival_prob_slices(law: &ArrivalLaw, times: &[u64], n: u64) -> f64 {
    let k = times.len();
    if k == 0 || times[k - 1] > n {
        return f64::NEG_INFINITY;
    }
    let mut total = 0.0;
    for j in 1..k {
        match log_pmf(law, j as u64, times[j] - times[j - 1], times[j - 1]) {
            Ok(lp) => total += lp,
            Err(_) => return f64::NEG_INFINITY,
        }
    }
    match log_survival(law, n - times[k - 1], k as u64, times[k - 1]) {
        Ok(lp) => total + lp,
        Err(_) => f64::NEG_INFINITY,
    }
}

/// Prior hyperparameters for the arrival parameter updates. `lambda` uses a
/// shape/rate Gamma; `theta` is flat on `(-tau, theta_max)` and `tau` flat on
/// `(0, 1)`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ArrivalPriors {
    pub beta_a: f64,
    pub beta_b: f64,
    pub lambda_shape: f64,
    pub lambda_rate: f64,
    pub theta_max: f64,
}

impl Default for ArrivalPriors {
    fn default() -> Self {
        Self {
            beta_a: 1.0,
            beta_b: 1.0,
            lambda_shape: 1.0,
            lambda_rate: 1.0,
            theta_max: THETA_MAX_DEFAULT,
        }
    }
}

impl ArrivalPriors {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("beta_a", self.beta_a),
            ("beta_b", self.beta_b),
            ("lambda_shape", self.lambda_shape),
            ("lambda_rate", self.lambda_rate),
            ("theta_max", self.theta_max),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidPrior(format!("{name} = {v} must be positive")));
            }
        }
        Ok(())
    }
}

/// Slice-sampler tuning shared by the parameter updates.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SliceTuning {
    pub alpha_width: f64,
    pub theta_width: f64,
    pub tau_width: f64,
    pub max_step_outs: u32,
}

impl Default for SliceTuning {
    fn default() -> Self {
        Self {
            alpha_width: 0.5,
            theta_width: 1.0,
            tau_width: 0.1,
            max_step_outs: 50,
        }
    }
}

/// Beta posterior parameters for geometric interarrivals given `(T, n)`.
///
/// `K - 1` observed interarrivals plus the censored tail contribute
/// `n - K` total failure counts by memorylessness.
pub fn geometric_posterior(k: usize, n: u64, priors: &ArrivalPriors) -> (f64, f64) {
    (
        priors.beta_a + (k as f64 - 1.0),
        priors.beta_b + (n as f64 - k as f64),
    )
}

/// One posterior update of the arrival parameters given the current arrival
/// times. Conjugate for geometric and shifted-Poisson interarrivals; one
/// univariate slice sweep per parameter for the PYP-induced law.
///
/// `alpha` is read only by the coupled variant, whose tau is pinned to it.
pub fn posterior_update_arrival_params<R: Rng + ?Sized>(
    model: &InterarrivalModel,
    t: &ArrivalTimes,
    n: u64,
    alpha: f64,
    priors: &ArrivalPriors,
    tuning: &SliceTuning,
    rng: &mut R,
) -> Result<InterarrivalModel> {
    priors.validate()?;
    let k = t.k();
    match *model {
        InterarrivalModel::Geometric { .. } => {
            let (a, b) = geometric_posterior(k, n, priors);
            let beta = BetaDist::new(a, b)
                .map_err(|_| Error::InvalidPrior(format!("Beta({a}, {b})")))?
                .sample(rng);
            Ok(InterarrivalModel::Geometric {
                beta: beta.clamp(f64::MIN_POSITIVE, 1.0 - 1e-15),
            })
        }
        InterarrivalModel::ShiftedPoisson { lambda } => {
            // Latent censored interarrival restores exact conjugacy.
            let censored = sample_truncated_shifted_poisson(lambda, n - t.last(), rng);
            let observed_sum: u64 = t.interarrivals().map(|d| d - 1).sum();
            let shape = priors.lambda_shape + observed_sum as f64 + (censored - 1) as f64;
            let rate = priors.lambda_rate + k as f64;
            let lambda = GammaDist::new(shape, 1.0 / rate)
                .map_err(|_| Error::InvalidPrior(format!("Gamma({shape}, rate {rate})")))?
                .sample(rng);
            Ok(InterarrivalModel::ShiftedPoisson {
                lambda: lambda.max(f64::MIN_POSITIVE),
            })
        }
        InterarrivalModel::PypInduced { theta, tau } => {
            let theta = slice_theta(theta, tau, t, n, priors, tuning, rng);
            let tau = slice_tau(theta, tau, t, n, tuning, rng);
            Ok(InterarrivalModel::PypInduced { theta, tau })
        }
        InterarrivalModel::CoupledPyp { theta } => {
            if !(alpha > 0.0 && alpha < 1.0) {
                return Err(Error::ParamOutOfRange {
                    name: "alpha",
                    value: alpha,
                    expected: "(0, 1) for the coupled PYP model",
                });
            }
            let theta = slice_theta(theta, alpha, t, n, priors, tuning, rng);
            Ok(InterarrivalModel::CoupledPyp { theta })
        }
    }
}

fn slice_theta<R: Rng + ?Sized>(
    theta: f64,
    tau: f64,
    t: &ArrivalTimes,
    n: u64,
    priors: &ArrivalPriors,
    tuning: &SliceTuning,
    rng: &mut R,
) -> f64 {
    let lo = -tau + PARAM_EPS;
    let hi = priors.theta_max;
    let target = |x: f64| {
        if x <= lo || x >= hi {
            return f64::NEG_INFINITY;
        }
        log_arrival_sequence_prob(&ArrivalLaw::Pyp { theta: x, tau }, t, n)
            .unwrap_or(f64::NEG_INFINITY)
    };
    slice_sample(
        theta.clamp(lo + PARAM_EPS, hi - PARAM_EPS),
        target,
        tuning.theta_width,
        tuning.max_step_outs,
        rng,
    )
}

fn slice_tau<R: Rng + ?Sized>(
    theta: f64,
    tau: f64,
    t: &ArrivalTimes,
    n: u64,
    tuning: &SliceTuning,
    rng: &mut R,
) -> f64 {
    let lo = (-theta).max(0.0) + 1e-9;
    let hi = 1.0 - 1e-9;
    let target = |x: f64| {
        if x <= lo || x >= hi {
            return f64::NEG_INFINITY;
        }
        log_arrival_sequence_prob(&ArrivalLaw::Pyp { theta, tau: x }, t, n)
            .unwrap_or(f64::NEG_INFINITY)
    };
    slice_sample(
        tau.clamp(lo + 1e-12, hi - 1e-12),
        target,
        tuning.tau_width,
        tuning.max_step_outs,
        rng,
    )
}

/// Draw from the shifted Poisson conditioned on `Δ > m`.
fn sample_truncated_shifted_poisson<R: Rng + ?Sized>(lambda: f64, m: u64, rng: &mut R) -> u64 {
    if m == 0 {
        let x: f64 = Poisson::new(lambda).expect("lambda > 0").sample(rng);
        return 1 + x as u64;
    }
    let log_tail = log_poisson_sf_ge(m, lambda);
    if log_tail < -650.0 {
        // Tail mass concentrates on the first feasible value.
        return m + 1;
    }
    // Inverse-CDF walk over X = Δ - 1 >= m.
    let mut u = rng.random::<f64>() * log_tail.exp();
    let mut x = m;
    let mut p = log_poisson_pmf(m, lambda).exp();
    loop {
        if u <= p || p < 1e-320 {
            return x + 1;
        }
        u -= p;
        x += 1;
        p *= lambda / x as f64;
    }
}

/// Which interarrival family to fit or sample under.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ArrivalFamily {
    Geometric,
    ShiftedPoisson,
    PypInduced,
    CoupledPyp,
}

impl ArrivalFamily {
    pub fn name(&self) -> &'static str {
        match self {
            ArrivalFamily::Geometric => "geometric",
            ArrivalFamily::ShiftedPoisson => "shifted-poisson",
            ArrivalFamily::PypInduced => "pyp",
            ArrivalFamily::CoupledPyp => "coupled-pyp",
        }
    }

    pub fn from_name(s: &str) -> Result<Self> {
        match s {
            "geometric" => Ok(ArrivalFamily::Geometric),
            "shifted-poisson" => Ok(ArrivalFamily::ShiftedPoisson),
            "pyp" => Ok(ArrivalFamily::PypInduced),
            "coupled-pyp" => Ok(ArrivalFamily::CoupledPyp),
            other => Err(Error::BadArgument(format!(
                "unknown family '{other}': expected geometric, shifted-poisson, pyp, or coupled-pyp"
            ))),
        }
    }
}

/// Result of an arrival-parameter fit.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ArrivalFit {
    pub model: InterarrivalModel,
    pub log_lik: f64,
    pub boundary: bool,
}

/// Closed-form or numerical maximum-likelihood arrival parameters.
///
/// Geometric and shifted-Poisson use the closed forms
/// `β̂ = (K−1)/(n−K)` and `λ̂ = (n−K)/(K−1)`; the PYP-induced law maximizes
/// [`log_arrival_sequence_prob`] by a grid-seeded nested golden-section
/// search over `τ ∈ (0,1)` and `θ ∈ (−τ+ε, Θ_max)`.
pub fn fit_arrivals_mle(family: ArrivalFamily, t: &ArrivalTimes, n: u64) -> Result<ArrivalFit> {
    let k = t.k() as u64;
    if k < 2 {
        return Err(Error::InsufficientData(
            "arrival MLE needs at least two vertices".into(),
        ));
    }
    match family {
        ArrivalFamily::Geometric => {
            if k == n {
                // Every step an arrival: the closed form divides by zero.
                let model = InterarrivalModel::Geometric { beta: 1.0 - 1e-12 };
                let log_lik =
                    log_arrival_sequence_prob(&model.resolve(0.0)?, t, n).unwrap_or(f64::NAN);
                return Ok(ArrivalFit {
                    model,
                    log_lik,
                    boundary: true,
                });
            }
            let beta = (k as f64 - 1.0) / (n as f64 - k as f64);
            let boundary = !(beta > 0.0 && beta < 1.0);
            let beta = beta.clamp(PARAM_EPS, 1.0 - PARAM_EPS);
            let model = InterarrivalModel::Geometric { beta };
            let log_lik = log_arrival_sequence_prob(&model.resolve(0.0)?, t, n)?;
            Ok(ArrivalFit {
                model,
                log_lik,
                boundary,
            })
        }
        ArrivalFamily::ShiftedPoisson => {
            let lambda = (n as f64 - k as f64) / (k as f64 - 1.0);
            let boundary = lambda <= 0.0;
            let lambda = lambda.max(PARAM_EPS);
            let model = InterarrivalModel::ShiftedPoisson { lambda };
            let log_lik = log_arrival_sequence_prob(&model.resolve(0.0)?, t, n)?;
            Ok(ArrivalFit {
                model,
                log_lik,
                boundary,
            })
        }
        ArrivalFamily::PypInduced => {
            let (theta, tau, log_lik) = fit_pyp_arrivals(t, n, THETA_MAX_DEFAULT)?;
            let boundary = tau <= 2.0 * PARAM_EPS
                || tau >= 1.0 - 2.0 * PARAM_EPS
                || theta >= THETA_MAX_DEFAULT * 0.99
                || theta <= -tau + 2.0 * PARAM_EPS;
            Ok(ArrivalFit {
                model: InterarrivalModel::PypInduced { theta, tau },
                log_lik,
                boundary,
            })
        }
        ArrivalFamily::CoupledPyp => Err(Error::InsufficientData(
            "the coupled PYP family is fit jointly with alpha; use the model fit".into(),
        )),
    }
}

/// Theta-dependent part of the PYP arrival log-likelihood; the gamma
/// products over steps telescope, so this is O(1):
///
/// `Σ_{j=1}^{K−1} ln(θ+jτ) + ln Γ(1+θ) − ln Γ(n+θ)`
/// with the sum collapsed through `ln Γ(θ/τ+K) − ln Γ(θ/τ+1) + (K−1) ln τ`.
pub(crate) fn pyp_theta_part(k: usize, n: u64, theta: f64, tau: f64) -> f64 {
    let ratio = theta / tau;
    (k as f64 - 1.0) * tau.ln() + lgamma(ratio + k as f64) - lgamma(ratio + 1.0)
        + lgamma(1.0 + theta)
        - lgamma(n as f64 + theta)
}

/// Tau-dependent part of the PYP arrival log-likelihood, O(K):
///
/// `Σ_{j=2}^{K} [ln Γ(T_j−1−(j−1)τ) − ln Γ(T_{j−1}−(j−1)τ)]
///    + ln Γ(n−Kτ) − ln Γ(T_K−Kτ)`
pub(crate) fn pyp_tau_part(times: &[u64], n: u64, tau: f64) -> f64 {
    let k = times.len();
    let mut total = 0.0;
    for j in 2..=k {
        let jt = (j as f64 - 1.0) * tau;
        total += lgamma(times[j - 1] as f64 - 1.0 - jt) - lgamma(times[j - 2] as f64 - jt);
    }
    let kt = k as f64 * tau;
    total + lgamma(n as f64 - kt) - lgamma(times[k - 1] as f64 - kt)
}

/// Nested golden-section maximization of the PYP arrival likelihood. The
/// O(K) tau part is computed once per tau; the inner theta search is O(1)
/// per evaluation and runs on a log scale via `v = ln(θ + τ)` so
/// boundary-hugging and very large optima are both reachable.
fn fit_pyp_arrivals(t: &ArrivalTimes, n: u64, theta_max: f64) -> Result<(f64, f64, f64)> {
    let times = t.times();
    let k = times.len();
    let v_hi = (theta_max + 1.0).ln();
    let v_lo = PARAM_EPS.ln();
    let profile = |tau: f64| -> (f64, f64) {
        let tau_part = pyp_tau_part(times, n, tau);
        let inner = |v: f64| {
            let theta = v.exp() - tau;
            if theta >= theta_max {
                return f64::NEG_INFINITY;
            }
            tau_part + pyp_theta_part(k, n, theta, tau)
        };
        let (v_best, f_best) = opt::grid_then_golden(inner, v_lo, v_hi, 33, 80);
        (v_best.exp() - tau, f_best)
    };
    let outer = |tau: f64| profile(tau).1;
    let (tau_best, _) = opt::grid_then_golden(outer, PARAM_EPS, 1.0 - PARAM_EPS, 33, 60);
    let (theta_best, f_best) = profile(tau_best);
    if !f_best.is_finite() {
        return Err(Error::Numeric(
            "PYP arrival likelihood is degenerate everywhere on the search box".into(),
        ));
    }
    Ok((theta_best, tau_best, f_best))
}

/// Sum of pmf terms and the complementary survival term; used by the
/// normalization tests and kept here so all models share one code path.
pub fn normalization_check(law: &ArrivalLaw, arrived: u64, t_prev: u64, horizon: u64) -> f64 {
    let mut terms: Vec<f64> = Vec::with_capacity(horizon as usize + 1);
    for s in 1..=horizon {
        terms.push(log_pmf(law, arrived, s, t_prev).expect("valid state"));
    }
    terms.push(log_survival(law, horizon, arrived, t_prev).expect("valid state"));
    log_sum_exp(&terms).exp()
}
