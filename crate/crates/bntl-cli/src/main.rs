//! Command-line surface: `generate`, `mle`, `gibbs`, and `summarize`
//! subcommands over the bntl library, with seeded bit-reproducible runs and
//! a run manifest written next to every output.

mod commands;
mod config;
mod inputs;
mod manifest;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use bntl::error::{Error, ErrorClass};

#[derive(Parser)]
#[command(
    name = "bntl",
    version,
    about = "Sampling, Gibbs inference, and maximum-likelihood estimation \
             for Beta Neutral-to-the-Left multigraph models"
)]
struct Cli {
    /// Key = value config file mirroring the long flags; explicit flags win.
    #[arg(long, global = true)]
    config: Option<std::path::PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    Generate(commands::generate::GenerateArgs),
    Mle(commands::mle::MleArgs),
    Gibbs(commands::gibbs::GibbsArgs),
    Summarize(commands::summarize::SummarizeArgs),
}

fn main() -> ExitCode {
    let argv = match config::expand_argv(std::env::args().collect()) {
        Ok(argv) => argv,
        Err(e) => return fail("usage", &e.to_string(), 2),
    };
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            // Clap renders its own message; keep its exit semantics but make
            // sure usage errors land on code 2.
            let is_help = matches!(
                e.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            );
            let _ = e.print();
            return if is_help {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            };
        }
    };
    let result = match cli.command {
        Command::Generate(args) => commands::generate::run(args, &argv),
        Command::Mle(args) => commands::mle::run(args, &argv),
        Command::Gibbs(args) => commands::gibbs::run(args, &argv),
        Command::Summarize(args) => commands::summarize::run(args, &argv),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let (kind, code) = classify(&e);
            fail(kind, &e.to_string(), code)
        }
    }
}

fn classify(e: &anyhow::Error) -> (&'static str, u8) {
    if let Some(err) = e.downcast_ref::<Error>() {
        match err.class() {
            ErrorClass::Usage => ("usage", 2),
            ErrorClass::Data => ("data", 3),
            ErrorClass::Numeric => ("numeric", 4),
            ErrorClass::Io => ("io", 1),
        }
    } else {
        ("io", 1)
    }
}

/// Machine-readable one-line JSON error on stderr.
fn fail(kind: &str, message: &str, code: u8) -> ExitCode {
    eprintln!(
        "{}",
        serde_json::json!({ "error": kind, "message": message })
    );
    ExitCode::from(code)
}
