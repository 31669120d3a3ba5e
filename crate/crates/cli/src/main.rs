//! `roaddiv`: corpus validation, suite sampling, diversity catalogues and
//! the study pipelines.

mod inputs;
mod pipeline;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use roaddiv::io::{AlignmentMode, RunConfig};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "roaddiv", version, about = "Road test-suite diversity toolkit")]
struct Cli {
    /// Master seed; overrides the config file.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Run configuration (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides the config file.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Point-based distances on aligned pairs, raw roads, or both.
    #[arg(long, global = true, value_enum)]
    align: Option<Align>,
    /// Worker threads for distance matrices (results do not depend on it).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Align {
    Aligned,
    Raw,
    Both,
}

#[derive(Args, Clone, Default)]
pub struct CorpusArgs {
    /// Corpus manifest, or a directory containing `manifest.json`.
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// Road document; overrides the manifest.
    #[arg(long)]
    roads: Option<PathBuf>,
    /// Trace table; overrides the manifest.
    #[arg(long)]
    traces: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Check a corpus and report every excluded road and rejected trace.
    Validate(CorpusArgs),
    /// Diversity catalogue for the suites in a suite file.
    Dm {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[arg(long)]
        suites: PathBuf,
    },
    /// Sample test suites from the corpus.
    Sample(CorpusArgs),
    /// Run study pipelines.
    Study {
        #[command(flatten)]
        corpus: CorpusArgs,
        /// Use these suites instead of sampling.
        #[arg(long)]
        suites: Option<PathBuf>,
        #[arg(required = true, value_enum)]
        questions: Vec<Question>,
    },
    /// Efficiency and additivity measurements only.
    Bench {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[arg(long)]
        suites: Option<PathBuf>,
    },
    /// Generate a synthetic corpus with rule-based traces.
    Synth {
        #[arg(long, default_value_t = 200)]
        count: usize,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, ValueEnum)]
pub enum Question {
    Rq1,
    Rq2,
    Rq3,
    Rq4,
}

fn config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p).with_context(|| format!("reading config {}", p.display()))?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.output_dir = out.clone();
    }
    if let Some(a) = cli.align {
        cfg.alignment = match a {
            Align::Aligned => AlignmentMode::Aligned,
            Align::Raw => AlignmentMode::Raw,
            Align::Both => AlignmentMode::Both,
        };
    }
    Ok(cfg)
}

/// Exit status: 0 success, 1 validation failures present.
fn run(cli: Cli) -> Result<u8> {
    let cfg = config(&cli)?;
    if let Some(jobs) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.max(1))
            .build_global()
            .context("configuring worker threads")?;
    }
    let parallel = cli.jobs.map_or(false, |j| j > 1);
    match cli.command {
        Command::Validate(args) => pipeline::validate(&cfg, &args),
        Command::Synth { count } => pipeline::synth(&cfg, count, cli.seed),
        Command::Sample(args) => pipeline::sample(&cfg, &args),
        Command::Dm { corpus, suites } => pipeline::dm(&cfg, &corpus, &suites, parallel),
        Command::Study {
            corpus,
            suites,
            questions,
        } => pipeline::study(&cfg, &corpus, suites.as_deref(), &questions, parallel),
        Command::Bench { corpus, suites } => pipeline::bench(&cfg, &corpus, suites.as_deref(), parallel),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
