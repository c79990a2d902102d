mod commands;
mod config;
mod run_dir;

use std::path::PathBuf;
use std::process::ExitCode;

use agp_core::corpus::College;
use agp_core::train::AblationMode;
use clap::{Args, Parser, Subcommand};
use thiserror::Error;
use tracing_subscriber::EnvFilter;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("{} is locked by another run", .0.display())]
    Locked(PathBuf),
    #[error(transparent)]
    Corpus(#[from] agp_core::corpus::CorpusError),
    #[error(transparent)]
    Stats(#[from] agp_core::stats::StatsError),
    #[error(transparent)]
    Train(#[from] agp_core::train::TrainError),
    #[error(transparent)]
    Decode(#[from] agp_core::decode::DecodeError),
    #[error(transparent)]
    Eval(#[from] agp_core::eval::EvalError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Parser)]
#[command(name = "agp", version, about = "Rewrite academic abstracts for general audiences")]
struct Cli {
    /// Settings file (TOML, or JSON by extension). Flags take precedence over it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Harvest ETD metadata over OAI-PMH into a CSV corpus.
    Harvest(HarvestArgs),
    /// Corpus statistics per college.
    Stats(StatsArgs),
    /// Stratified train/test split.
    Split(SplitArgs),
    /// Fine-tune a model and prompt encoder.
    Train(TrainArgs),
    /// Decode outputs for a corpus from a checkpoint.
    Generate(GenerateArgs),
    /// Score triples and write per-college reports.
    Evaluate(EvaluateArgs),
    /// Train, generate and evaluate every ablation variant.
    Ablate(AblateArgs),
}

#[derive(Debug, Args)]
pub struct HarvestArgs {
    #[arg(long)]
    pub endpoint: String,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long = "set")]
    pub set_spec: Option<String>,
    #[arg(long)]
    pub metadata_prefix: Option<String>,
    #[arg(long)]
    pub delay_ms: Option<u64>,
    #[arg(long)]
    pub retries: Option<u32>,
    /// Send only the resumption token on continuation requests.
    #[arg(long)]
    pub strict_resumption: bool,
    /// JSON map from college code to department names, replacing the built-in roster.
    #[arg(long)]
    pub roster: Option<PathBuf>,
    #[arg(long)]
    pub threshold: Option<f64>,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SplitArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    /// Directory receiving train.csv and test.csv.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub ratio: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args, Default)]
pub struct TrainOverrides {
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub tau_nce: Option<f64>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub max_steps: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub max_source_len: Option<usize>,
    #[arg(long)]
    pub max_target_len: Option<usize>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub run_dir: PathBuf,
    /// Train only on this college's records.
    #[arg(long)]
    pub college: Option<College>,
    #[arg(long)]
    pub ablation: Option<AblationMode>,
    #[command(flatten)]
    pub overrides: TrainOverrides,
}

#[derive(Debug, Args, Default)]
pub struct DecodeOverrides {
    #[arg(long)]
    pub num_candidates: Option<usize>,
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub max_output_tokens: Option<usize>,
    #[arg(long)]
    pub decode_seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    #[arg(long)]
    pub corpus: PathBuf,
    /// Candidate dump; triples.jsonl is written beside it unless --triples is given.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub triples: Option<PathBuf>,
    #[command(flatten)]
    pub overrides: DecodeOverrides,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub triples: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Score bertscore_f1 with the built-in exact-token matcher.
    #[arg(long)]
    pub reference_bertscore: bool,
}

#[derive(Debug, Args)]
pub struct AblateArgs {
    #[arg(long)]
    pub train: PathBuf,
    #[arg(long)]
    pub test: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub college: Option<College>,
    #[arg(long)]
    pub reference_bertscore: bool,
    #[command(flatten)]
    pub train_overrides: TrainOverrides,
    #[command(flatten)]
    pub decode_overrides: DecodeOverrides,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    tracing_subscriber::fmt()
        .with_env_filter(EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new("info")))
        .with_writer(std::io::stderr)
        .init();
    let result = config::RunConfig::load(cli.config.as_deref()).and_then(|cfg| match cli.command {
        Command::Harvest(a) => commands::harvest(a, cfg),
        Command::Stats(a) => commands::stats(a, cfg),
        Command::Split(a) => commands::split(a, cfg),
        Command::Train(a) => commands::train(a, cfg),
        Command::Generate(a) => commands::generate(a, cfg),
        Command::Evaluate(a) => commands::evaluate(a, cfg),
        Command::Ablate(a) => commands::ablate(a, cfg),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
