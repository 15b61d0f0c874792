//! `glyphforge` command line. Exit codes: 0 success, 1 empty or failed
//! result, 2 configuration or usage error.

mod commands;
mod eval;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "glyphforge", version, about = "Scene-text dataset synthesis and evaluation")]
pub struct Cli {
    /// Pipeline config (TOML).
    #[arg(long, global = true, env = "GLYPHFORGE_CONFIG")]
    pub config: Option<PathBuf>,
    /// Worker threads; defaults to the number of logical CPUs.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// error, warn, info, debug or trace. Logs go to stderr as JSON lines.
    #[arg(long, global = true, default_value = "warn")]
    pub log_level: String,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Create text-free backgrounds via the expert services.
    Backgrounds(BackgroundsArgs),
    /// Synthesize an annotated dataset.
    Synth(SynthArgs),
    /// Print the text block computed for a quad.
    Block(BlockArgs),
    /// Blend one word into one image.
    Render(RenderArgs),
    /// Detection and recognition metrics.
    #[command(subcommand)]
    Eval(EvalCommand),
    /// Check a synthesized dataset directory.
    Validate(ValidateArgs),
    /// Write synthetic backgrounds with segmentation and depth maps.
    Fixtures(FixturesArgs),
}

#[derive(Debug, Args)]
pub struct BackgroundsArgs {
    /// Prompt file, one prompt per line, '#' comments.
    #[arg(long, conflicts_with = "images", required_unless_present = "images")]
    pub prompts: Option<PathBuf>,
    /// Directory of existing images to clean instead of generating.
    #[arg(long)]
    pub images: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub t2i_endpoint: Option<String>,
    #[arg(long)]
    pub ocr_endpoint: Option<String>,
    #[arg(long)]
    pub inpaint_endpoint: Option<String>,
    #[arg(long)]
    pub quality_endpoint: Option<String>,
    #[arg(long)]
    pub max_iters: Option<u32>,
    #[arg(long)]
    pub quality_threshold: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub backgrounds: PathBuf,
    /// Directory with `<stem>.seg.png`, `<stem>.seg.json`, `<stem>.depth.{bin,png}`.
    #[arg(long)]
    pub aux: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub count: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Word list, one per line; overrides `dataset.lexicon`.
    #[arg(long)]
    pub lexicon: Option<PathBuf>,
    /// Remote render service; overrides `render.endpoint`.
    #[arg(long)]
    pub render_endpoint: Option<String>,
    /// Fail instead of falling back to the built-in renderer.
    #[arg(long)]
    pub no_fallback: bool,
    #[arg(long)]
    pub k_max: Option<u32>,
    #[arg(long, value_parser = ["png", "jpeg"])]
    pub format: Option<String>,
}

#[derive(Debug, Args)]
pub struct BlockArgs {
    /// "x1,y1,x2,y2,x3,y3,x4,y4"
    #[arg(long, allow_hyphen_values = true)]
    pub quad: String,
    /// "WxH"
    #[arg(long)]
    pub image_size: String,
    #[arg(long)]
    pub min_side: Option<u32>,
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    #[arg(long)]
    pub image: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    pub quad: String,
    #[arg(long)]
    pub text: String,
    #[arg(long)]
    pub out: PathBuf,
    /// Text-free reference background; defaults to the input image.
    #[arg(long)]
    pub background: Option<PathBuf>,
    #[arg(long)]
    pub endpoint: Option<String>,
    #[arg(long)]
    pub no_fallback: bool,
    #[arg(long, default_value = "render-0")]
    pub request_id: String,
}

#[derive(Debug, Subcommand)]
pub enum EvalCommand {
    /// Precision/recall/hmean over ICDAR-style annotation files.
    Det(EvalDetArgs),
    /// Word accuracy and mean 1-NED.
    Rec(EvalRecArgs),
}

#[derive(Debug, Args)]
pub struct EvalDetArgs {
    /// Prediction directory (or single file).
    #[arg(long)]
    pub pred: PathBuf,
    /// Ground-truth directory (or single file).
    #[arg(long)]
    pub gt: PathBuf,
    #[arg(long, default_value_t = crate::metrics::DEFAULT_IOU_THRESHOLD)]
    pub iou: f64,
}

#[derive(Debug, Args)]
pub struct EvalRecArgs {
    /// Tab-separated `prediction<TAB>ground_truth` lines.
    #[arg(long, conflicts_with_all = ["pred", "gt"])]
    pub pairs: Option<PathBuf>,
    /// One prediction per line, aligned with --gt.
    #[arg(long, requires = "gt")]
    pub pred: Option<PathBuf>,
    #[arg(long, requires = "pred")]
    pub gt: Option<PathBuf>,
    #[arg(long)]
    pub case_insensitive: bool,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    pub dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct FixturesArgs {
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 4)]
    pub count: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 320)]
    pub width: u32,
    #[arg(long, default_value_t = 240)]
    pub height: u32,
}

/// Failure carrying its exit code.
#[derive(Debug)]
pub(crate) struct CliError {
    code: i32,
    message: String,
}

impl CliError {
    pub(crate) fn usage(m: impl std::fmt::Display) -> Self {
        Self { code: EXIT_USAGE, message: m.to_string() }
    }

    pub(crate) fn failed(m: impl std::fmt::Display) -> Self {
        Self { code: EXIT_FAILED, message: m.to_string() }
    }
}

pub(crate) type CliResult = Result<i32, CliError>;

fn init_logging(level: &str) {
    let filter = tracing_subscriber::EnvFilter::try_new(level)
        .unwrap_or_else(|_| tracing_subscriber::EnvFilter::new("warn"));
    let _ = tracing_subscriber::fmt()
        .json()
        .with_env_filter(filter)
        .with_writer(std::io::stderr)
        .try_init();
}

/// Parses `args` (program name first) and runs the command, writing
/// results to `out`.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    EXIT_OK
                }
                _ => {
                    let _ = e.print();
                    EXIT_USAGE
                }
            };
        }
    };
    init_logging(&cli.log_level);
    match commands::dispatch(&cli, out) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}

pub fn main() -> i32 {
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    run(std::env::args_os(), &mut lock)
}
