mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use tracing_subscriber::EnvFilter;

use crate::commands::CliError;
use crate::config::RunConfig;

#[derive(Parser)]
#[command(name = "docseek", version, about = "Agentic question answering over long documents")]
struct Cli {
    /// Run configuration (TOML).
    #[arg(long, short, global = true)]
    config: Option<PathBuf>,
    /// More log output on stderr; repeat for more.
    #[arg(long, short, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build an outline from a layout-parsed document.
    Ingest(IngestArgs),
    /// Answer one question about one document.
    Ask(AskArgs),
    /// Generate training trajectories for a corpus.
    Synthesize(SynthesizeArgs),
    /// Turn a synthesized dataset into masked SFT samples.
    ExportSft(ExportArgs),
    /// Score predictions against gold answers.
    Eval(EvalArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum DocFormat {
    MineruJson,
    NeutralJson,
    /// An outline previously written by `ingest`.
    OutlineXml,
}

#[derive(Args)]
pub struct DocArgs {
    /// Input format; guessed from the extension when omitted.
    #[arg(long, value_enum)]
    pub format: Option<DocFormat>,
    /// Override the document id.
    #[arg(long)]
    pub doc_id: Option<String>,
}

#[derive(Args)]
pub struct IngestArgs {
    pub path: PathBuf,
    #[command(flatten)]
    pub doc: DocArgs,
    /// Output directory; defaults to `<output_dir>/outlines`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Generate captions for visual elements with the summarizer.
    #[arg(long)]
    pub captions: bool,
    /// Scripted summarizer scenario (JSON) or replay log (JSONL) used by --captions.
    #[arg(long)]
    pub summarizer: Option<PathBuf>,
}

#[derive(Args)]
pub struct AskArgs {
    pub question: String,
    #[arg(long)]
    pub doc: PathBuf,
    #[command(flatten)]
    pub doc_args: DocArgs,
    /// Scripted policy scenario or replay log instead of the configured endpoint.
    #[arg(long)]
    pub policy: Option<PathBuf>,
    /// Scripted summarizer scenario or replay log.
    #[arg(long)]
    pub summarizer: Option<PathBuf>,
    /// Trace file; defaults to `<output_dir>/traces/<doc_id>.trace.jsonl`.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Directory receiving replay logs of live endpoint traffic.
    #[arg(long)]
    pub record: Option<PathBuf>,
    #[arg(long)]
    pub max_steps: Option<usize>,
}

#[derive(Args)]
pub struct SynthesizeArgs {
    /// Corpus manifest; defaults to `paths.corpus_manifest`.
    pub manifest: Option<PathBuf>,
    /// Output directory; defaults to `<output_dir>/synthesis`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Scenario bundle with scripted responses per document.
    #[arg(long)]
    pub scenarios: Option<PathBuf>,
    /// Documents processed at once.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u16).range(1..))]
    pub parallel: u16,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TokenizerChoice {
    Whitespace,
    /// Skip token masks.
    None,
}

#[derive(Args)]
pub struct ExportArgs {
    /// `dataset.jsonl` written by `synthesize`.
    pub dataset: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value = "whitespace")]
    pub tokenizer: TokenizerChoice,
}

#[derive(Args)]
pub struct EvalArgs {
    /// Predictions JSONL: `{"id"?, "response"}` per line.
    pub predictions: PathBuf,
    /// Gold JSONL: `{"id"?, "question", "answer", "type", "precision"?}` per line.
    pub gold: PathBuf,
    /// Scripted judge scenario; enables judge scoring.
    #[arg(long, conflicts_with = "judge_endpoint")]
    pub judge: Option<PathBuf>,
    /// Use the configured judge endpoint.
    #[arg(long)]
    pub judge_endpoint: bool,
    /// Scripted extractor scenario; rule extraction is used otherwise.
    #[arg(long, conflicts_with = "extractor_endpoint")]
    pub extractor: Option<PathBuf>,
    /// Use the configured extractor endpoint.
    #[arg(long)]
    pub extractor_endpoint: bool,
    /// Write the full report as JSON.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn init_logging(verbose: u8) {
    let default = match verbose {
        0 => "warn",
        1 => "info",
        2 => "debug",
        _ => "trace",
    };
    let filter = EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new(default));
    let _ = tracing_subscriber::fmt()
        .with_env_filter(filter)
        .with_writer(std::io::stderr)
        .try_init();
}

fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = RunConfig::load(cli.config.as_deref()).map_err(CliError::Usage)?;
    match cli.command {
        Command::Ingest(a) => commands::ingest(&cfg, a),
        Command::Ask(a) => commands::ask(&cfg, a),
        Command::Synthesize(a) => commands::synthesize(&cfg, a),
        Command::ExportSft(a) => commands::export_sft(a),
        Command::Eval(a) => commands::eval(&cfg, a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    init_logging(cli.verbose);
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
