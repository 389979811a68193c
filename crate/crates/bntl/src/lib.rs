//! Beta Neutral-to-the-Left (BNTL) random multigraph models: forward
//! sampling, closed-form likelihoods, Gibbs inference over unobserved vertex
//! arrival orders, and maximum-likelihood estimation on observed edge-end
//! sequences.
//!
//! The model family covers preferential-attachment-style graphs whose
//! power-law degree exponents span the full range above 1, indexed by a
//! discount parameter and an interarrival law for new-vertex arrival times.

pub mod arrivals;
pub mod diagnostics;
pub mod error;
pub mod generate;
pub mod gibbs;
pub mod ingest;
pub mod likelihood;
pub mod math;
pub mod mle;
pub(crate) mod opt;
pub mod priors;
pub mod slice;
pub mod types;

pub use error::{Error, Result};
pub use types::{
    ArrivalLaw, ArrivalTimes, BntlModel, EdgeEndSequence, InterarrivalModel, OrderedDegrees,
    UnlabeledObservation,
};
