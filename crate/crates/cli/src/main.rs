//! `progfc` command-line interface.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "progfc", version, about = "Program-guided fact-checking")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum RetrievalMode {
    Onestep,
    Iterative,
}

#[derive(Subcommand)]
enum Command {
    /// Build a BM25 index from a JSONL corpus of {id, title, text}.
    Index {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0.9)]
        k1: f64,
        #[arg(long, default_value_t = 0.4)]
        b: f64,
    },
    /// Sample reasoning programs for every claim in a dataset.
    Generate {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long, default_value = "hover")]
        format: String,
        /// Bundled set name (hover, feverous) or an asset file.
        #[arg(long)]
        exemplars: Option<String>,
        #[arg(long)]
        n: Option<u32>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        /// `{claim: [program, ...]}` JSON used instead of the endpoint.
        #[arg(long)]
        mock_generator: Option<PathBuf>,
    },
    /// Execute generated programs and vote.
    Execute {
        #[arg(long)]
        programs: PathBuf,
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long, default_value = "hover")]
        format: String,
        #[arg(long)]
        setting: Option<String>,
        #[arg(long)]
        index: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
        /// `{"questions": {..}, "claims": {..}}` used instead of the endpoint.
        #[arg(long)]
        mock_handler: Option<PathBuf>,
        #[arg(long)]
        traces: PathBuf,
        #[arg(long)]
        predictions: PathBuf,
    },
    /// Generate, execute and score a dataset; output goes to run/{config-hash}/.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        prompt_style: Option<String>,
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
    /// Macro-F1 and per-hop metrics from a predictions file.
    Eval {
        #[arg(long)]
        predictions: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Mean recall@k of one-step or program-guided retrieval.
    RetrieveEval {
        #[arg(long)]
        index: PathBuf,
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long, default_value = "hover")]
        format: String,
        #[arg(long, default_value_t = 10)]
        k: usize,
        #[arg(long, value_enum, default_value = "onestep")]
        mode: RetrievalMode,
        /// Traces whose programs drive iterative retrieval.
        #[arg(long)]
        traces: Option<PathBuf>,
    },
    /// Error-category breakdown of wrong predictions.
    Errors {
        #[arg(long)]
        predictions: PathBuf,
        #[arg(long)]
        traces: PathBuf,
        #[arg(long)]
        annotations: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match commands::dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
