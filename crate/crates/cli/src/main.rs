//! `topotext` command-line interface.
//!
//! Exit codes: 0 success, 2 unreadable or malformed files, 3 shape or
//! validation errors, 64 usage errors.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub const EXIT_FORMAT: u8 = 2;
pub const EXIT_VALIDATION: u8 = 3;
pub const EXIT_USAGE: u8 = 64;

#[derive(Debug, Parser)]
#[command(
    name = "topotext",
    version,
    about = "Topological features for authorship attribution",
    after_help = "Set TOPOTEXT_THREADS to cap the worker threads used for batch work.\n\
                  Exit codes: 0 ok, 2 I/O or format error, 3 shape or validation error, 64 usage error."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Turn embeddings (or attention matrices) into H0 feature vectors.
    Extract(ExtractArgs),
    /// Train a classification head and write it as THD1 plus JSON config.
    Train(TrainArgs),
    /// Evaluate a trained head, print the metrics table, optionally save JSON.
    Eval(EvalArgs),
    /// Generate a synthetic benchmark split.
    Gen(GenArgs),
    /// Write the persistence diagram of one point cloud.
    Diagram(DiagramArgs),
    /// Measure feature-extraction throughput.
    Bench(BenchArgs),
    /// Run a variant sweep over several seeds.
    Experiment(ExperimentArgs),
    /// Project a dataset onto its top principal components.
    Pca(PcaArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ExtractMode {
    /// Reshape each pooled embedding into rows x cols.
    Pool,
    /// Each record is a rows x cols attention matrix.
    Attn,
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    /// Input dataset (.emb1 or .csv).
    #[arg(long, short)]
    pub input: PathBuf,
    /// Output dataset (.emb1 or .csv).
    #[arg(long, short)]
    pub output: PathBuf,
    /// Point-cloud rows (defaults to the closest-to-square shape in pool mode).
    #[arg(long)]
    pub rows: Option<usize>,
    /// Point-cloud columns (defaults to width / rows).
    #[arg(long)]
    pub cols: Option<usize>,
    /// pool: reshape pooled embeddings; attn: records are attention matrices.
    #[arg(long, value_enum, default_value_t = ExtractMode::Pool)]
    pub mode: ExtractMode,
    /// Accept reshapes with more rows than columns.
    #[arg(long)]
    pub allow_unstable: bool,
    /// Attention mode: pad or truncate to this many pairs (default rows - 1).
    #[arg(long)]
    pub expected_pairs: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    Plain,
    Tda,
    Gaussian,
    TdaAttn,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Training dataset (.emb1 or .csv).
    #[arg(long, short)]
    pub input: PathBuf,
    /// Model file; the config goes next to it as <stem>.config.json.
    #[arg(long, short)]
    pub output: PathBuf,
    /// Head variant.
    #[arg(long, value_enum, default_value_t = VariantArg::Plain)]
    pub variant: VariantArg,
    /// Number of labels (defaults to the dataset's label count).
    #[arg(long)]
    pub labels: Option<usize>,
    /// Passes over the training data.
    #[arg(long, default_value_t = 5)]
    pub epochs: usize,
    /// Adam learning rate.
    #[arg(long, default_value_t = 2e-5)]
    pub lr: f64,
    /// Mini-batch size.
    #[arg(long, default_value_t = 16)]
    pub batch: usize,
    /// Dropout probability applied to the embedding during training.
    #[arg(long, default_value_t = 0.3)]
    pub dropout: f64,
    /// Noise scale of the gaussian variant.
    #[arg(long, default_value_t = 0.1)]
    pub sigma: f64,
    /// Master seed for every random stream.
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Reshape rows for tda; attention rows for tda-attn.
    #[arg(long)]
    pub rows: Option<usize>,
    /// Reshape columns for tda; attention columns for tda-attn.
    #[arg(long)]
    pub cols: Option<usize>,
    /// Accept reshapes with more rows than columns.
    #[arg(long)]
    pub allow_unstable: bool,
    /// tda-attn: pad or truncate to this many pairs (default rows - 1).
    #[arg(long)]
    pub expected_pairs: Option<usize>,
    /// tda: compute features from the raw embedding rather than the dropped-out copy.
    #[arg(long)]
    pub tda_from_raw: bool,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Model file written by `train`.
    #[arg(long, short)]
    pub model: PathBuf,
    /// Evaluation dataset (.emb1 or .csv).
    #[arg(long, short)]
    pub input: PathBuf,
    /// Where to write the metrics report as JSON.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Report JSON of a baseline on the same data; adds the macro-F1 gain.
    #[arg(long)]
    pub baseline: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GenKind {
    MeanShift,
    StructureShift,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SplitArg {
    Train,
    Validation,
    Test,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    /// Generator family.
    #[arg(long, value_enum)]
    pub kind: GenKind,
    /// Number of classes.
    #[arg(long, default_value_t = 6)]
    pub classes: usize,
    /// Samples per class: one count for all, or a comma-separated list.
    #[arg(long, value_delimiter = ',', default_value = "200")]
    pub per_class: Vec<usize>,
    /// Embedding width.
    #[arg(long, default_value_t = 768)]
    pub dim: usize,
    /// Structure-shift reshape rows.
    #[arg(long, default_value_t = 24)]
    pub rows: usize,
    /// Split to generate; splits of one seed share class structure.
    #[arg(long, value_enum, default_value_t = SplitArg::Train)]
    pub split: SplitArg,
    /// Master seed for every random stream.
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Output dataset (.emb1 or .csv); a manifest is written alongside.
    #[arg(long, short)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct DiagramArgs {
    /// Point CSV: one point per line, comma-separated coordinates, optional header.
    #[arg(long, conflicts_with = "input")]
    pub points: Option<PathBuf>,
    /// Dataset to take one sample from.
    #[arg(long, short)]
    pub input: Option<PathBuf>,
    /// Record index within --input.
    #[arg(long, default_value_t = 0)]
    pub index: usize,
    /// Reshape rows for --input samples.
    #[arg(long)]
    pub rows: Option<usize>,
    /// Reshape columns for --input samples.
    #[arg(long)]
    pub cols: Option<usize>,
    /// Accept reshapes with more rows than columns.
    #[arg(long)]
    pub allow_unstable: bool,
    /// Highest homology dimension (0 or 1).
    #[arg(long, default_value_t = 0)]
    pub max_dim: usize,
    /// H1 filtration cutoff (default: enclosing radius).
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Write JSON instead of CSV.
    #[arg(long)]
    pub json: bool,
    /// Output file (default: standard output).
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Cloud sizes to time.
    #[arg(long, value_delimiter = ',', default_value = "24,128,512")]
    pub rows: Vec<usize>,
    /// Columns of every cloud.
    #[arg(long, default_value_t = 32)]
    pub cols: usize,
    /// Clouds per size.
    #[arg(long, default_value_t = 16)]
    pub samples: usize,
    /// Master seed for every random stream.
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BenchmarkArg {
    StructureShift,
    MeanShift,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    /// Plan JSON file.
    #[arg(long, conflicts_with = "benchmark", required_unless_present = "benchmark")]
    pub plan: Option<PathBuf>,
    /// Built-in benchmark plan.
    #[arg(long, value_enum)]
    pub benchmark: Option<BenchmarkArg>,
    /// Seeds (override the plan's).
    #[arg(long, value_delimiter = ',')]
    pub seeds: Option<Vec<u64>>,
    /// Directory for results.csv and results.md (overrides the plan's).
    #[arg(long, short)]
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PcaArgs {
    /// Dataset (.emb1 or .csv).
    #[arg(long, short)]
    pub input: PathBuf,
    /// Project the head's input features (embedding plus TDA block) of this model.
    #[arg(long, short)]
    pub model: Option<PathBuf>,
    /// Number of components.
    #[arg(long, default_value_t = 2)]
    pub k: usize,
    /// Output CSV (`label,pc1,pc2,...`).
    #[arg(long, short)]
    pub output: PathBuf,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(topotext::Error),
}

impl From<topotext::Error> for CliError {
    fn from(e: topotext::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Core(e.into())
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Core(e) if e.is_format_error() => EXIT_FORMAT,
            CliError::Core(_) => EXIT_VALIDATION,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

pub type CliResult<T = ()> = Result<T, CliError>;

fn configure_threads() -> CliResult {
    let Ok(value) = std::env::var("TOPOTEXT_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("TOPOTEXT_THREADS must be a positive integer, got {value:?}")))?;
    // Fails only if a pool already exists, which cannot happen this early.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    Ok(())
}

fn run(cli: Cli) -> CliResult {
    configure_threads()?;
    match cli.command {
        Command::Extract(a) => commands::extract(&a),
        Command::Train(a) => commands::train(&a),
        Command::Eval(a) => commands::eval(&a),
        Command::Gen(a) => commands::gen(&a),
        Command::Diagram(a) => commands::diagram(&a),
        Command::Bench(a) => commands::bench(&a),
        Command::Experiment(a) => commands::experiment(&a),
        Command::Pca(a) => commands::pca(&a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("topotext: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
