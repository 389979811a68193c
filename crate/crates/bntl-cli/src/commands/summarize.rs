//! `bntl summarize`: dataset counts, degree histogram, and arrival curve as
//! CSV for external plotting.

use std::io::Write;
use std::path::PathBuf;

use anyhow::{Context, Result};
use serde::Serialize;

use bntl::diagnostics::{arrival_curve, degree_histogram, mean_interarrival};
use bntl::types::degrees_from_ends;

use crate::inputs::InputArgs;
use crate::manifest::write_manifest;

#[derive(Debug, clap::Args)]
pub struct SummarizeArgs {
    #[command(flatten)]
    pub input: InputArgs,

    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Serialize)]
struct Counts {
    vertices: u64,
    edges: Option<u64>,
    ends: u64,
    max_degree: u64,
    mean_interarrival: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ingest_counts: Option<bntl::ingest::IngestCounts>,
}

pub fn run(args: SummarizeArgs, argv: &[String]) -> Result<()> {
    let loaded = args.input.load()?;
    let z = &loaded.ends;
    let (d, t) = degrees_from_ends(z);
    std::fs::create_dir_all(&args.out_dir)
        .with_context(|| format!("creating {}", args.out_dir.display()))?;

    let mut hist = std::io::BufWriter::new(std::fs::File::create(
        args.out_dir.join("degree_histogram.csv"),
    )?);
    writeln!(hist, "degree,count")?;
    for (deg, count) in degree_histogram(&d) {
        writeln!(hist, "{deg},{count}")?;
    }

    let mut curve = std::io::BufWriter::new(std::fs::File::create(
        args.out_dir.join("arrival_curve.csv"),
    )?);
    writeln!(curve, "step,vertices")?;
    for (step, k) in arrival_curve(&t) {
        writeln!(curve, "{step},{k}")?;
    }

    let counts = Counts {
        vertices: z.num_vertices(),
        edges: (z.len() % 2 == 0).then(|| z.len() as u64 / 2),
        ends: z.len() as u64,
        max_degree: d.degrees().iter().copied().max().unwrap_or(0),
        mean_interarrival: mean_interarrival(&t).ok(),
        ingest_counts: loaded.counts,
    };
    std::fs::write(
        args.out_dir.join("counts.json"),
        serde_json::to_string_pretty(&counts)?,
    )?;
    write_manifest(&args.out_dir, argv, &[&args.input.input])?;
    println!(
        "{} vertices, {} ends -> {}",
        counts.vertices,
        counts.ends,
        args.out_dir.display()
    );
    Ok(())
}
