//! Domain types shared by every other module: edge-end sequences labeled in
//! arrival order, vertex arrival times, ordered degree sequences, and the
//! interarrival model families.
//!
//! Vertex ids are 1-based in arrival order everywhere; external labels
//! survive only in the maps returned by [`canonical_relabel`] and the
//! ingestion layer. Degrees count ends of edges, so a self-loop contributes
//! two to one vertex.

use std::collections::HashMap;
use std::hash::Hash;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A sequence of edge ends with vertices labeled in order of first
/// appearance: `ends[0] = 1` and the running maximum grows by at most one
/// per element.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeEndSequence {
    ends: Vec<u64>,
}

impl EdgeEndSequence {
    pub fn new(ends: Vec<u64>) -> Result<Self> {
        if ends.is_empty() {
            return Err(Error::EmptySequence);
        }
        let mut max_seen = 0u64;
        for (i, &z) in ends.iter().enumerate() {
            if z == 0 || z > max_seen + 1 {
                return Err(Error::MalformedLabeling {
                    position: i,
                    found: z,
                    expected: max_seen + 1,
                });
            }
            max_seen = max_seen.max(z);
        }
        Ok(Self { ends })
    }

    pub fn ends(&self) -> &[u64] {
        &self.ends
    }

    /// Total number of ends (the paper's n).
    pub fn len(&self) -> usize {
        self.ends.len()
    }

    pub fn is_empty(&self) -> bool {
        false // length >= 1 by construction
    }

    /// Number of distinct vertices.
    pub fn num_vertices(&self) -> u64 {
        self.ends.iter().copied().max().unwrap_or(0)
    }

    /// Prefix of the first `n_ends` ends; valid because any prefix of a
    /// canonically labeled sequence is canonically labeled.
    pub fn prefix(&self, n_ends: usize) -> Result<Self> {
        if n_ends == 0 || n_ends > self.ends.len() {
            return Err(Error::DegenerateSplit(format!(
                "prefix of {n_ends} ends out of 1..={}",
                self.ends.len()
            )));
        }
        Ok(Self {
            ends: self.ends[..n_ends].to_vec(),
        })
    }
}

/// Strictly increasing arrival times with `T_1 = 1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArrivalTimes {
    times: Vec<u64>,
}

impl ArrivalTimes {
    pub fn new(times: Vec<u64>) -> Result<Self> {
        if times.is_empty() {
            return Err(Error::EmptySequence);
        }
        if times[0] != 1 {
            return Err(Error::Infeasible {
                reason: format!("T_1 = {} (must be 1)", times[0]),
            });
        }
        for w in times.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::Infeasible {
                    reason: format!(
                        "arrival times not strictly increasing at {} -> {}",
                        w[0], w[1]
                    ),
                });
            }
        }
        Ok(Self { times })
    }

    pub fn times(&self) -> &[u64] {
        &self.times
    }

    /// Number of vertices K.
    pub fn k(&self) -> usize {
        self.times.len()
    }

    /// Last arrival time `T_K`.
    pub fn last(&self) -> u64 {
        *self.times.last().unwrap()
    }

    /// Interarrivals `Δ_j = T_j − T_{j−1}` for `j = 2..K`.
    pub fn interarrivals(&self) -> impl Iterator<Item = u64> + '_ {
        self.times.windows(2).map(|w| w[1] - w[0])
    }
}

/// Vertex degrees in arrival order, with cumulative sums precomputed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrderedDegrees {
    degrees: Vec<u64>,
    cumsums: Vec<u64>,
}

impl OrderedDegrees {
    pub fn new(degrees: Vec<u64>) -> Result<Self> {
        if degrees.is_empty() {
            return Err(Error::EmptySequence);
        }
        if let Some(pos) = degrees.iter().position(|&d| d == 0) {
            return Err(Error::Infeasible {
                reason: format!("degree of vertex {} is zero", pos + 1),
            });
        }
        let mut cumsums = Vec::with_capacity(degrees.len());
        let mut acc = 0u64;
        for &d in &degrees {
            acc += d;
            cumsums.push(acc);
        }
        Ok(Self { degrees, cumsums })
    }

    pub fn degrees(&self) -> &[u64] {
        &self.degrees
    }

    /// Cumulative degree sums `d̄_j`.
    pub fn cumsums(&self) -> &[u64] {
        &self.cumsums
    }

    /// Total number of ends `n = d̄_K`.
    pub fn n(&self) -> u64 {
        *self.cumsums.last().unwrap()
    }

    /// Number of vertices K.
    pub fn k(&self) -> usize {
        self.degrees.len()
    }
}

/// Reconstructs the ordered degrees and arrival times of a labeled edge-end
/// sequence: `d_j` counts occurrences of `j` and `T_j` is the index (1-based)
/// of its first appearance.
pub fn degrees_from_ends(z: &EdgeEndSequence) -> (OrderedDegrees, ArrivalTimes) {
    let k = z.num_vertices() as usize;
    let mut degrees = vec![0u64; k];
    let mut times = vec![0u64; k];
    for (i, &v) in z.ends().iter().enumerate() {
        let idx = (v - 1) as usize;
        if degrees[idx] == 0 {
            times[idx] = i as u64 + 1;
        }
        degrees[idx] += 1;
    }
    let d = OrderedDegrees::new(degrees).expect("canonical sequence yields positive degrees");
    let t = ArrivalTimes::new(times).expect("canonical sequence yields valid arrival times");
    (d, t)
}

/// True iff `(d, T)` can coexist: lengths match, T is strictly increasing
/// from 1, `T_K ≤ n`, and the cumulative constraint `T_j − 1 ≤ d̄_{j−1}`
/// holds for every `j ≥ 2`.
pub fn validate_feasible(d: &OrderedDegrees, t: &ArrivalTimes) -> bool {
    let k = d.k();
    if t.k() != k {
        return false;
    }
    let times = t.times();
    if times[0] != 1 {
        return false;
    }
    if t.last() > d.n() {
        return false;
    }
    for j in 1..k {
        if times[j] <= times[j - 1] {
            return false;
        }
        if times[j] - 1 > d.cumsums()[j - 1] {
            return false;
        }
    }
    true
}

/// Relabels arbitrary vertex labels by order of first appearance. Returns
/// the canonical sequence and the original label of each canonical id
/// (index 0 holds the label of vertex 1).
pub fn canonical_relabel<T: Eq + Hash + Clone>(ends: &[T]) -> Result<(EdgeEndSequence, Vec<T>)> {
    if ends.is_empty() {
        return Err(Error::EmptySequence);
    }
    let mut ids: HashMap<&T, u64> = HashMap::new();
    let mut labels = Vec::new();
    let mut out = Vec::with_capacity(ends.len());
    for label in ends {
        let next = ids.len() as u64 + 1;
        let id = *ids.entry(label).or_insert_with(|| {
            labels.push(label.clone());
            next
        });
        out.push(id);
    }
    Ok((EdgeEndSequence { ends: out }, labels))
}

/// Interarrival model families for the arrival-time law.
///
/// `CoupledPyp` carries no discount of its own: it reads `τ = α` from the
/// enclosing [`BntlModel`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum InterarrivalModel {
    Geometric { beta: f64 },
    ShiftedPoisson { lambda: f64 },
    PypInduced { theta: f64, tau: f64 },
    CoupledPyp { theta: f64 },
}

impl InterarrivalModel {
    pub fn validate(&self) -> Result<()> {
        match *self {
            InterarrivalModel::Geometric { beta } => {
                if !(beta > 0.0 && beta < 1.0) {
                    return Err(Error::ParamOutOfRange {
                        name: "beta",
                        value: beta,
                        expected: "(0, 1)",
                    });
                }
            }
            InterarrivalModel::ShiftedPoisson { lambda } => {
                if !(lambda > 0.0 && lambda.is_finite()) {
                    return Err(Error::ParamOutOfRange {
                        name: "lambda",
                        value: lambda,
                        expected: "(0, inf)",
                    });
                }
            }
            InterarrivalModel::PypInduced { theta, tau } => {
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
            }
            InterarrivalModel::CoupledPyp { .. } => {
                // theta > -alpha is checked against the discount in resolve().
            }
        }
        Ok(())
    }

    /// Concrete arrival law with the coupled variant resolved against the
    /// discount parameter.
    pub fn resolve(&self, alpha: f64) -> Result<ArrivalLaw> {
        self.validate()?;
        Ok(match *self {
            InterarrivalModel::Geometric { beta } => ArrivalLaw::Geometric { beta },
            InterarrivalModel::ShiftedPoisson { lambda } => ArrivalLaw::ShiftedPoisson { lambda },
            InterarrivalModel::PypInduced { theta, tau } => ArrivalLaw::Pyp { theta, tau },
            InterarrivalModel::CoupledPyp { theta } => {
                if !(alpha > 0.0 && alpha < 1.0) {
                    return Err(Error::ParamOutOfRange {
                        name: "alpha",
                        value: alpha,
                        expected: "(0, 1) for the coupled PYP model",
                    });
                }
                if !(theta > -alpha) {
                    return Err(Error::ParamOutOfRange {
                        name: "theta",
                        value: theta,
                        expected: "(-alpha, inf) for the coupled PYP model",
                    });
                }
                ArrivalLaw::Pyp { theta, tau: alpha }
            }
        })
    }

    pub fn family_name(&self) -> &'static str {
        match self {
            InterarrivalModel::Geometric { .. } => "geometric",
            InterarrivalModel::ShiftedPoisson { .. } => "shifted-poisson",
            InterarrivalModel::PypInduced { .. } => "pyp",
            InterarrivalModel::CoupledPyp { .. } => "coupled-pyp",
        }
    }
}

/// An interarrival law with all parameters pinned down.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ArrivalLaw {
    Geometric { beta: f64 },
    ShiftedPoisson { lambda: f64 },
    Pyp { theta: f64, tau: f64 },
}

/// A BNTL model: discount `α < 1` plus an interarrival model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BntlModel {
    pub alpha: f64,
    pub arrivals: InterarrivalModel,
}

impl BntlModel {
    pub fn new(alpha: f64, arrivals: InterarrivalModel) -> Result<Self> {
        if !(alpha < 1.0) {
            return Err(Error::ParamOutOfRange {
                name: "alpha",
                value: alpha,
                expected: "(-inf, 1)",
            });
        }
        arrivals.resolve(alpha)?;
        Ok(Self { alpha, arrivals })
    }

    /// Concrete arrival law (infallible: validated at construction).
    pub fn law(&self) -> ArrivalLaw {
        self.arrivals
            .resolve(self.alpha)
            .expect("validated at construction")
    }
}

/// Degrees of an unlabeled graph, indexed by an arbitrary but stable
/// external vertex id `0..K`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnlabeledObservation {
    degrees: Vec<u64>,
}

impl UnlabeledObservation {
    pub fn new(degrees: Vec<u64>) -> Result<Self> {
        if degrees.is_empty() {
            return Err(Error::EmptySequence);
        }
        if degrees.iter().any(|&d| d == 0) {
            return Err(Error::Infeasible {
                reason: "unlabeled observation contains a zero degree".into(),
            });
        }
        Ok(Self { degrees })
    }

    /// Degree of each external vertex id.
    pub fn degrees(&self) -> &[u64] {
        &self.degrees
    }

    pub fn k(&self) -> usize {
        self.degrees.len()
    }

    pub fn n(&self) -> u64 {
        self.degrees.iter().sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degrees_from_ends_examples() {
        let z = EdgeEndSequence::new(vec![1, 2, 1, 3, 2]).unwrap();
        let (d, t) = degrees_from_ends(&z);
        assert_eq!(d.degrees(), &[2, 2, 1]);
        assert_eq!(t.times(), &[1, 2, 4]);
        assert_eq!(d.n(), 5);

        let z = EdgeEndSequence::new(vec![1]).unwrap();
        let (d, t) = degrees_from_ends(&z);
        assert_eq!(d.degrees(), &[1]);
        assert_eq!(t.times(), &[1]);

        let z = EdgeEndSequence::new(vec![1, 1, 1, 2]).unwrap();
        let (d, t) = degrees_from_ends(&z);
        assert_eq!(d.degrees(), &[3, 1]);
        assert_eq!(t.times(), &[1, 4]);
    }

    #[test]
    fn malformed_labeling_is_rejected() {
        let err = EdgeEndSequence::new(vec![1, 3]).unwrap_err();
        match err {
            Error::MalformedLabeling {
                position,
                found,
                expected,
            } => {
                assert_eq!((position, found, expected), (1, 3, 2));
            }
            other => panic!("unexpected error {other:?}"),
        }
        assert!(EdgeEndSequence::new(vec![2]).is_err());
        assert!(EdgeEndSequence::new(vec![]).is_err());
    }

    #[test]
    fn validate_feasible_examples() {
        let d = OrderedDegrees::new(vec![2, 2, 1]).unwrap();
        let t = ArrivalTimes::new(vec![1, 2, 4]).unwrap();
        assert!(validate_feasible(&d, &t));

        let d = OrderedDegrees::new(vec![1, 1, 3]).unwrap();
        let t = ArrivalTimes::new(vec![1, 2, 5]).unwrap();
        assert!(!validate_feasible(&d, &t));

        // Not strictly increasing is rejected at construction already.
        assert!(ArrivalTimes::new(vec![1, 1]).is_err());

        // Mismatched lengths are infeasible.
        let d = OrderedDegrees::new(vec![3, 1]).unwrap();
        let t = ArrivalTimes::new(vec![1]).unwrap();
        assert!(!validate_feasible(&d, &t));
    }

    #[test]
    fn minimal_arrival_times_always_feasible() {
        // T_j = j is feasible for any degree sequence.
        let d = OrderedDegrees::new(vec![1, 1, 1, 5, 2]).unwrap();
        let t = ArrivalTimes::new((1..=5).collect()).unwrap();
        assert!(validate_feasible(&d, &t));
    }

    #[test]
    fn canonical_relabel_examples() {
        let (z, map) = canonical_relabel(&[7u64, 3, 7]).unwrap();
        assert_eq!(z.ends(), &[1, 2, 1]);
        assert_eq!(map, vec![7, 3]);

        let (z, map) = canonical_relabel(&[1u64, 2, 3]).unwrap();
        assert_eq!(z.ends(), &[1, 2, 3]);
        assert_eq!(map, vec![1, 2, 3]);

        let (z, _) = canonical_relabel(&["a", "a", "b"]).unwrap();
        assert_eq!(z.ends(), &[1, 1, 2]);
    }

    #[test]
    fn round_trip_consistency() {
        let z = EdgeEndSequence::new(vec![1, 2, 2, 3, 1, 3, 4, 2]).unwrap();
        let (d, t) = degrees_from_ends(&z);
        assert_eq!(d.n(), z.len() as u64);
        assert!(validate_feasible(&d, &t));
    }

    #[test]
    fn model_validation() {
        assert!(BntlModel::new(0.5, InterarrivalModel::Geometric { beta: 0.25 }).is_ok());
        assert!(BntlModel::new(1.0, InterarrivalModel::Geometric { beta: 0.25 }).is_err());
        assert!(BntlModel::new(-3.0, InterarrivalModel::Geometric { beta: 0.25 }).is_ok());
        // Coupled PYP requires alpha in (0,1).
        assert!(BntlModel::new(-0.5, InterarrivalModel::CoupledPyp { theta: 1.0 }).is_err());
        assert!(BntlModel::new(0.75, InterarrivalModel::CoupledPyp { theta: 1.0 }).is_ok());
        assert!(BntlModel::new(0.2, InterarrivalModel::CoupledPyp { theta: -0.5 }).is_err());
        assert!(InterarrivalModel::PypInduced {
            theta: -0.6,
            tau: 0.5
        }
        .validate()
        .is_err());
    }
}
