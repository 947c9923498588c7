//! `motifcall`: encode data into composite-motif blocks, simulate sequencing,
//! call or search motifs, and score block recovery.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use motifcall::experiment::{ExperimentConfig, Method};

#[derive(Parser, Debug)]
#[command(name = "motifcall", version, about)]
struct Cli {
    /// TOML experiment config; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; defaults to the available cores.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Pack a file into blocks of composite motifs.
    Encode {
        #[arg(long)]
        input: PathBuf,
    },
    /// Simulate reads, squiggles and ground truth for a blocks file.
    Simulate {
        #[arg(long)]
        blocks: PathBuf,
        /// Skip rendering squiggles.
        #[arg(long)]
        no_squiggles: bool,
    },
    /// Decode squiggles into motif calls.
    Call {
        #[arg(long)]
        squiggles: PathBuf,
        /// Also write per-read emission matrices.
        #[arg(long)]
        emissions: bool,
    },
    /// Search basecalled reads for motifs.
    Search {
        #[arg(long)]
        reads: PathBuf,
        #[arg(long, value_parser = ["ze", "am"])]
        method: String,
    },
    /// Vote calls into blocks and score recovery against truth.
    Recover {
        #[arg(long)]
        calls: PathBuf,
        #[arg(long)]
        truth: PathBuf,
        #[arg(long)]
        blocks: PathBuf,
    },
    /// Compare pipelines: detection, coverage, quality sweep and dilution tables.
    Report {
        #[arg(long, num_args = 1..)]
        calls: Vec<PathBuf>,
        #[arg(long)]
        truth: PathBuf,
        #[arg(long)]
        blocks: PathBuf,
        /// Simulate Poisson-coverage corpora and tabulate decoding accuracy.
        #[arg(long)]
        dilution: bool,
    },
    /// Run the brute-force oracle suites.
    Selftest,
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading config {}", path.display()))?;
            toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.output = Some(out.display().to_string());
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the thread pool")?;
    }
    let mut cfg = load_config(&cli)?;
    let out = PathBuf::from(cfg.output.take().unwrap_or_else(|| "out".into()));
    let out = out.as_path();
    match &cli.command {
        Command::Encode { input } => commands::encode_cmd(&cfg, out, input),
        Command::Simulate {
            blocks,
            no_squiggles,
        } => commands::simulate_cmd(&cfg, out, blocks, !no_squiggles),
        Command::Call {
            squiggles,
            emissions,
        } => commands::call_cmd(&cfg, out, squiggles, *emissions),
        Command::Search { reads, method } => {
            commands::search_cmd(&cfg, out, reads, method.parse::<Method>()?)
        }
        Command::Recover {
            calls,
            truth,
            blocks,
        } => commands::recover_cmd(&cfg, out, calls, truth, blocks),
        Command::Report {
            calls,
            truth,
            blocks,
            dilution,
        } => commands::report_cmd(&cfg, out, calls, truth, blocks, *dilution),
        Command::Selftest => commands::selftest_cmd(&cfg, cli.out.is_some().then_some(out)),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
