use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use gec_cli::commands::{
    run_correct, run_evaluate, run_fertility, run_report, run_validate, Filter,
};
use gec_cli::config::Config;
use gec_core::corpus::Split;

/// Corpus-driven grammatical error correction harness for Indic
/// languages: prompt LLMs over chat endpoints, score hypotheses, and
/// profile tokenizers.
#[derive(Parser)]
#[command(name = "gec", version, about, max_term_width = 100)]
struct Cli {
    /// Path to the run configuration.
    #[arg(long, global = true, default_value = "gec.toml")]
    config: PathBuf,
    /// Override the configured output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Override the configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Override the configured worker count.
    #[arg(long, global = true)]
    parallelism: Option<usize>,
    /// Suppress progress output.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check that corpora, tokenizers, and systems are all loadable.
    Validate,
    /// Produce hypothesis files by querying the configured providers.
    Correct(FilterArgs),
    /// Score existing hypothesis files against references.
    Evaluate(FilterArgs),
    /// Measure subword fertility for the configured tokenizers.
    Fertility,
    /// Merge per-run evaluations into one comparison report.
    Report,
}

#[derive(clap::Args)]
struct FilterArgs {
    /// Restrict to one system by name.
    #[arg(long)]
    system: Option<String>,
    /// Restrict to one language by code.
    #[arg(long)]
    language: Option<String>,
    /// Restrict to one split.
    #[arg(long)]
    split: Option<SplitArg>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SplitArg {
    Train,
    Dev,
    Test,
}

impl From<SplitArg> for Split {
    fn from(split: SplitArg) -> Self {
        match split {
            SplitArg::Train => Split::Train,
            SplitArg::Dev => Split::Dev,
            SplitArg::Test => Split::Test,
        }
    }
}

impl From<&FilterArgs> for Filter {
    fn from(args: &FilterArgs) -> Self {
        Filter {
            system: args.system.clone(),
            language: args.language.clone(),
            split: args.split.map(Split::from),
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let mut config = Config::load(&cli.config)?;
    config.apply_overrides(cli.out, cli.seed, cli.parallelism)?;
    match &cli.command {
        Command::Validate => run_validate(&config, cli.quiet),
        Command::Correct(args) => run_correct(&config, &Filter::from(args), cli.quiet),
        Command::Evaluate(args) => run_evaluate(&config, &Filter::from(args), cli.quiet),
        Command::Fertility => run_fertility(&config, cli.quiet),
        Command::Report => run_report(&config, cli.quiet),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(error) => {
            eprintln!("error: {error:#}");
            ExitCode::FAILURE
        }
    }
}
