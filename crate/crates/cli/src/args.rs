use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(name = "tempo", version, about = "Time-aware encoder pre-training and evaluation pipeline")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// `key = value` run configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Overrides both the config file and TEMPO_SEED.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for document-parallel work.
    #[arg(long, global = true, default_value_t = 1)]
    pub jobs: usize,
    /// Directory for default artifact paths.
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    /// Re-run a stage even if its manifest says it is up to date.
    #[arg(long, global = true)]
    pub force: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate synthetic inputs.
    Synth(SynthArgs),
    /// Random-guess ACC and MAE for a label space.
    Baseline(BaselineArgs),
    /// Tag temporal expressions, signals and persons.
    Annotate(AnnotateArgs),
    /// Keep only sentences with explicit content time.
    Refine(IoArgs),
    /// Month-indexed person sets.
    Calendar(IoArgs),
    /// Train the subword vocabulary.
    Vocab(VocabArgs),
    /// Materialize training examples for one epoch.
    Examples(ExamplesArgs),
    /// Joint multi-task pre-training.
    Pretrain(PretrainArgs),
    /// Fine-tune a time classifier.
    Finetune(FinetuneArgs),
    /// Evaluate a classifier or semantic change scores.
    Eval(EvalArgs),
    /// Zero-shot ranking of candidate years.
    Similarity(SimilarityArgs),
    /// Month-range estimates for questions.
    Timescope(TimescopeArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SynthKind {
    /// News-style documents with person annotations.
    Corpus,
    /// Event descriptions that state their own year.
    Leakage,
    /// Two period corpora plus gold shift indices.
    Shift,
}

#[derive(Debug, Args, Serialize)]
pub struct SynthArgs {
    #[arg(long, value_enum)]
    pub kind: SynthKind,
    #[arg(long, default_value_t = 200)]
    pub n: usize,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 1987)]
    pub first_year: i32,
    #[arg(long, default_value_t = 2007)]
    pub last_year: i32,
}

#[derive(Debug, Args, Serialize)]
pub struct BaselineArgs {
    #[arg(long)]
    pub classes: usize,
    #[arg(long, default_value_t = 20)]
    pub per_class: usize,
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct AnnotateArgs {
    /// Ingestion JSONL; defaults to the configured corpus.
    #[arg(long = "in")]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// `external` (record or sidecar annotations) or `heuristic`.
    #[arg(long)]
    pub persons: Option<String>,
    /// JSONL of `{doc_id, persons}` used when records carry no persons.
    #[arg(long)]
    pub sidecar: Option<PathBuf>,
    /// Skip malformed records instead of failing.
    #[arg(long)]
    pub skip_bad: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct IoArgs {
    #[arg(long = "in")]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct VocabArgs {
    #[arg(long = "in")]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub size: Option<usize>,
}

#[derive(Debug, Args, Serialize)]
pub struct ExamplesArgs {
    #[arg(long = "in")]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub vocab: Option<PathBuf>,
    #[arg(long)]
    pub calendar: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Comma-separated, e.g. `etamlm,dd,tser`.
    #[arg(long)]
    pub objectives: Option<String>,
    #[arg(long, default_value_t = 0)]
    pub epoch: u64,
}

#[derive(Debug, Args, Serialize)]
pub struct PretrainArgs {
    #[arg(long = "in")]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub vocab: Option<PathBuf>,
    #[arg(long)]
    pub calendar: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Per-step loss log (JSONL).
    #[arg(long)]
    pub log: Option<PathBuf>,
    #[arg(long)]
    pub objectives: Option<String>,
    #[arg(long)]
    pub steps: Option<u64>,
    #[arg(long)]
    pub preset: Option<String>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GridKind {
    /// Learning rates for large initialized encoders.
    Standard,
    /// Learning rates for small randomly initialized encoders.
    Desk,
}

#[derive(Debug, Args, Serialize)]
pub struct FinetuneArgs {
    /// Pre-trained checkpoint; defaults to the pretrain output.
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    #[arg(long)]
    pub train: PathBuf,
    #[arg(long)]
    pub val: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub granularity: Option<String>,
    #[arg(long, value_enum, default_value_t = GridKind::Standard)]
    pub grid: GridKind,
    /// Comma-separated overrides for the grid axes.
    #[arg(long)]
    pub batch_sizes: Option<String>,
    #[arg(long)]
    pub learning_rates: Option<String>,
    #[arg(long)]
    pub epochs: Option<String>,
    /// Independent runs with seed offsets 0..runs.
    #[arg(long, default_value_t = 1)]
    pub runs: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EvalTask {
    DocumentDating,
    EventDating,
    SemanticChange,
}

#[derive(Debug, Args, Serialize)]
pub struct EvalArgs {
    #[arg(long, value_enum)]
    pub task: EvalTask,
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    /// Test instances (dating tasks).
    #[arg(long)]
    pub test: Option<PathBuf>,
    /// Must match the fine-tuned label space when given.
    #[arg(long)]
    pub granularity: Option<String>,
    /// Annotated corpus to retrieve a context document from.
    #[arg(long)]
    pub context_from: Option<PathBuf>,
    /// Earlier-period sentences, one per line (semantic change).
    #[arg(long)]
    pub t1: Option<PathBuf>,
    /// Later-period sentences, one per line (semantic change).
    #[arg(long)]
    pub t2: Option<PathBuf>,
    /// `word<TAB>shift` gold file (semantic change).
    #[arg(long)]
    pub gold: Option<PathBuf>,
    /// Another report whose per-run accuracies are compared by Welch's t-test.
    #[arg(long)]
    pub compare: Option<PathBuf>,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct SimilarityArgs {
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    /// Event records with their gold year.
    #[arg(long)]
    pub events: PathBuf,
    #[arg(long, default_value_t = 1987)]
    pub first_year: i32,
    #[arg(long, default_value_t = 2007)]
    pub last_year: i32,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct TimescopeArgs {
    /// Month-granularity fine-tuned checkpoint.
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    /// JSONL of `{text, context_timestamp?, context_text?}`.
    #[arg(long)]
    pub questions: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}
