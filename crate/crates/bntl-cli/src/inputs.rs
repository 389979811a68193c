//! Shared input loading: edge lists (plain or gzip), plain end lists, and
//! the binary end cache, with format sniffing.

use std::io::Read;
use std::path::Path;

use anyhow::{Context, Result};
use clap::ValueEnum;

use bntl::ingest::{self, EndOrder, IngestCounts, IngestOptions};
use bntl::types::EdgeEndSequence;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InputFormat {
    /// Sniff: binary cache by magic, otherwise an edge list.
    Auto,
    /// Whitespace-separated `src dst [timestamp]` lines.
    EdgeList,
    /// One vertex label per line, already in end order.
    Ends,
    /// Binary end cache written by `generate`.
    Cache,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EndOrderFlag {
    SrcFirst,
    Random,
}

#[derive(Debug, clap::Args)]
pub struct InputArgs {
    /// Input file path.
    #[arg(long = "in", value_name = "FILE")]
    pub input: std::path::PathBuf,

    #[arg(long, value_enum, default_value = "auto")]
    pub input_format: InputFormat,

    /// Treat the edge list as having no timestamp column.
    #[arg(long)]
    pub no_timestamps: bool,

    #[arg(long)]
    pub drop_self_loops: bool,

    /// Drop repeated (src, dst, timestamp) lines.
    #[arg(long)]
    pub drop_duplicates: bool,

    /// Order of the two ends within an edge; alpha estimates can in
    /// principle depend on it.
    #[arg(long, value_enum, default_value = "src-first")]
    pub end_order: EndOrderFlag,

    /// Seed for `--end-order random`.
    #[arg(long, default_value_t = 0)]
    pub end_order_seed: u64,
}

pub struct LoadedInput {
    pub ends: EdgeEndSequence,
    pub counts: Option<IngestCounts>,
}

impl InputArgs {
    pub fn load(&self) -> Result<LoadedInput> {
        let format = match self.input_format {
            InputFormat::Auto => sniff(&self.input)?,
            other => other,
        };
        match format {
            InputFormat::Cache => {
                let f = std::fs::File::open(&self.input)
                    .with_context(|| format!("opening {}", self.input.display()))?;
                let ends = ingest::cache::read_ends(std::io::BufReader::new(f))?;
                Ok(LoadedInput { ends, counts: None })
            }
            InputFormat::Ends => {
                let reader = ingest::open_edge_stream(&self.input)?;
                let mut labels = Vec::new();
                for line in std::io::BufRead::lines(reader) {
                    let line = line?;
                    let t = line.trim();
                    if t.is_empty() || t.starts_with('#') {
                        continue;
                    }
                    labels.push(t.to_string());
                }
                let (ends, _) = bntl::types::canonical_relabel(&labels)?;
                Ok(LoadedInput { ends, counts: None })
            }
            InputFormat::EdgeList | InputFormat::Auto => {
                let opts = IngestOptions {
                    timestamps: !self.no_timestamps,
                    drop_self_loops: self.drop_self_loops,
                    drop_duplicates: self.drop_duplicates,
                };
                let reader = ingest::open_edge_stream(&self.input)?;
                let parsed = ingest::parse_edge_list(reader, &opts)?;
                let order = match self.end_order {
                    EndOrderFlag::SrcFirst => EndOrder::SrcFirst,
                    EndOrderFlag::Random => EndOrder::Random {
                        seed: self.end_order_seed,
                    },
                };
                let (ends, _) = ingest::ends_from_edges(&parsed.edges, order)?;
                Ok(LoadedInput {
                    ends,
                    counts: Some(parsed.counts),
                })
            }
        }
    }
}

fn sniff(path: &Path) -> Result<InputFormat> {
    let mut f = std::fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let mut magic = [0u8; 8];
    let got = f.read(&mut magic)?;
    if got == 8 && &magic == b"BNTLENDS" {
        Ok(InputFormat::Cache)
    } else {
        Ok(InputFormat::EdgeList)
    }
}
