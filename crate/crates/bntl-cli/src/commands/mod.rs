pub mod generate;
pub mod gibbs;
pub mod mle;
pub mod summarize;

use anyhow::{bail, Result};

use bntl::types::InterarrivalModel;

/// Builds an interarrival model from the family name and whichever
/// parameter flags were supplied, with sampling-friendly defaults.
pub fn model_from_flags(
    family: &str,
    beta: Option<f64>,
    lambda: Option<f64>,
    theta: Option<f64>,
    tau: Option<f64>,
) -> Result<InterarrivalModel> {
    let model = match family {
        "geometric" => InterarrivalModel::Geometric {
            beta: beta.unwrap_or(0.5),
        },
        "shifted-poisson" => InterarrivalModel::ShiftedPoisson {
            lambda: lambda.unwrap_or(1.0),
        },
        "pyp" => InterarrivalModel::PypInduced {
            theta: theta.unwrap_or(1.0),
            tau: tau.unwrap_or(0.5),
        },
        "coupled-pyp" => InterarrivalModel::CoupledPyp {
            theta: theta.unwrap_or(1.0),
        },
        other => bail!("unknown model family '{other}'"),
    };
    Ok(model)
}
