//! `bntl mle`: maximum-likelihood (or MAP) fits of one or more interarrival
//! families to an observed end sequence, with optional predictive scoring
//! on a held-out suffix.

use std::path::PathBuf;
use std::time::Instant;

use anyhow::{Context, Result};
use rayon::prelude::*;
use serde::Serialize;

use bntl::arrivals::ArrivalFamily;
use bntl::diagnostics::predictive_loglik_mle;
use bntl::ingest::split_train_test;
use bntl::mle::{fit_map, fit_model, FitReport};
use bntl::priors::{AlphaPrior, Priors};
use bntl::types::degrees_from_ends;

use crate::inputs::InputArgs;
use crate::manifest::write_manifest;

#[derive(Debug, clap::Args)]
pub struct MleArgs {
    #[command(flatten)]
    pub input: InputArgs,

    /// Comma-separated families, or `all`.
    #[arg(long, default_value = "all")]
    pub family: String,

    /// Fit on the first fraction of edges and score the rest.
    #[arg(long)]
    pub split: Option<f64>,

    /// MAP estimation instead of plain MLE.
    #[arg(long)]
    pub map: bool,

    /// Normal alpha prior `mean,sd` for --map (default: flat).
    #[arg(long, value_name = "MEAN,SD")]
    pub alpha_prior: Option<String>,

    /// Beta prior `a,b` on the geometric parameter for --map.
    #[arg(long, value_name = "A,B")]
    pub beta_prior: Option<String>,

    /// Gamma prior `shape,rate` on the shifted-Poisson rate for --map.
    #[arg(long, value_name = "SHAPE,RATE")]
    pub lambda_prior: Option<String>,

    /// Output JSON path; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Serialize)]
struct MleOutput {
    n_ends: u64,
    n_vertices: u64,
    split: Option<f64>,
    map: bool,
    fits: Vec<FamilyOutput>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ingest_counts: Option<bntl::ingest::IngestCounts>,
}

#[derive(Serialize)]
struct FamilyOutput {
    #[serde(flatten)]
    report: FitReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    predictive_log_lik: Option<f64>,
}

pub fn run(args: MleArgs, argv: &[String]) -> Result<()> {
    let loaded = args.input.load()?;
    let families = parse_families(&args.family)?;
    let priors = build_priors(&args)?;

    let full = &loaded.ends;
    let (fit_part, test): (_, Option<Vec<u64>>) = match args.split {
        Some(fraction) => {
            let (train, test) = split_train_test(full, fraction)?;
            (train, Some(test))
        }
        None => (full.clone(), None),
    };
    let (d, t) = degrees_from_ends(&fit_part);
    let n = fit_part.len() as u64;

    let fits: Vec<FamilyOutput> = families
        .par_iter()
        .map(|&family| -> Result<FamilyOutput> {
            let start = Instant::now();
            let fit = if args.map {
                fit_map(&d, &t, n, family, &priors)?
            } else {
                fit_model(&d, &t, n, family)?
            };
            let wall = start.elapsed().as_millis() as u64;
            let predictive = match &test {
                Some(test) => Some(predictive_loglik_mle(&fit_part, test, &fit.model)?),
                None => None,
            };
            Ok(FamilyOutput {
                report: FitReport::new(&fit, wall),
                predictive_log_lik: predictive,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let output = MleOutput {
        n_ends: full.len() as u64,
        n_vertices: full.num_vertices(),
        split: args.split,
        map: args.map,
        fits,
        ingest_counts: loaded.counts,
    };
    let rendered = serde_json::to_string_pretty(&output)?;
    match &args.out {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
                write_manifest(dir, argv, &[&args.input.input])?;
            }
            std::fs::write(path, rendered).with_context(|| format!("writing {}", path.display()))?;
        }
        None => println!("{rendered}"),
    }
    Ok(())
}

fn parse_families(spec: &str) -> Result<Vec<ArrivalFamily>> {
    if spec == "all" {
        return Ok(vec![
            ArrivalFamily::CoupledPyp,
            ArrivalFamily::PypInduced,
            ArrivalFamily::Geometric,
            ArrivalFamily::ShiftedPoisson,
        ]);
    }
    spec.split(',')
        .map(|s| ArrivalFamily::from_name(s.trim()).map_err(anyhow::Error::from))
        .collect()
}

fn build_priors(args: &MleArgs) -> Result<Priors> {
    let mut priors = Priors::default();
    if let Some(spec) = &args.alpha_prior {
        let (mean, sd) = parse_pair(spec, "--alpha-prior")?;
        priors.alpha = AlphaPrior::Normal { mean, sd };
    }
    if let Some(spec) = &args.beta_prior {
        let (a, b) = parse_pair(spec, "--beta-prior")?;
        priors.arrivals.beta_a = a;
        priors.arrivals.beta_b = b;
    }
    if let Some(spec) = &args.lambda_prior {
        let (a, b) = parse_pair(spec, "--lambda-prior")?;
        priors.arrivals.lambda_shape = a;
        priors.arrivals.lambda_rate = b;
    }
    Ok(priors)
}

fn parse_pair(spec: &str, flag: &str) -> Result<(f64, f64)> {
    let parts: Vec<&str> = spec.split(',').collect();
    if parts.len() != 2 {
        anyhow::bail!(bntl::Error::BadArgument(format!(
            "{flag} expects two comma-separated numbers"
        )));
    }
    Ok((
        parts[0].trim().parse().map_err(|_| {
            bntl::Error::BadArgument(format!("{flag}: '{}' is not a number", parts[0]))
        })?,
        parts[1].trim().parse().map_err(|_| {
            bntl::Error::BadArgument(format!("{flag}: '{}' is not a number", parts[1]))
        })?,
    ))
}
