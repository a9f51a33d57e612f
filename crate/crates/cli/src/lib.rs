//! Command-line driver. `run` parses arguments and executes one command; the
//! binary only adds logging setup and the exit code.

pub mod commands;
pub mod error;
pub mod manifest;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use echomesh::radar::VisibilityMode;
use echomesh::recon::ReconMode;

pub use error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "echomesh", about = "Radar-informed mesh reconstruction from simulated FMCW SAR data")]
#[command(disable_version_flag = true, arg_required_else_help = true)]
pub struct Cli {
    /// Worker threads; defaults to the number of logical cores.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Print tool and schema versions.
    #[arg(short = 'V', long)]
    pub version: bool,

    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Args)]
pub struct ConfigArg {
    /// Pipeline configuration (JSON); built-in defaults when absent.
    #[arg(long, env = "ECHOMESH_CONFIG")]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Synthesize the IF signal of a mesh.
    Simulate(SimulateArgs),
    /// Backproject a signal into per-view volumes and images.
    Image(ImageArgs),
    /// Deform a template to fit view images and, optionally, the signal.
    Reconstruct(ReconstructArgs),
    /// Compare a predicted mesh with a ground-truth mesh.
    Evaluate(EvaluateArgs),
    /// simulate, image, reconstruct and evaluate into one directory.
    Pipeline(PipelineArgs),
    /// Finite-difference check of every loss gradient.
    Gradcheck(GradcheckArgs),
    /// Write an ellipsoid scene mesh.
    MakeScene(MakeSceneArgs),
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub mesh: PathBuf,
    #[command(flatten)]
    pub config: ConfigArg,
    #[arg(long)]
    pub out: PathBuf,
    /// Overrides the configured visibility mode.
    #[arg(long)]
    pub mode: Option<VisibilityMode>,
    /// Adds complex white noise at this SNR.
    #[arg(long)]
    pub snr_db: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub force: bool,
}

#[derive(Debug, Args)]
pub struct ImageArgs {
    #[arg(long)]
    pub signal: PathBuf,
    /// Grid spec (JSON); the configured grid when absent.
    #[arg(long)]
    pub grid: Option<PathBuf>,
    #[command(flatten)]
    pub config: ConfigArg,
    /// Volume path template; `{v}` is replaced by the view id.
    #[arg(long)]
    pub out: String,
    /// Image path template; `{v}` is replaced by the view id.
    #[arg(long)]
    pub images: String,
    /// Optional PNG path template for inspection.
    #[arg(long)]
    pub png: Option<String>,
    /// Manifest path; `image.manifest.json` beside the first image by default.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    #[arg(long)]
    pub force: bool,
}

#[derive(Debug, Args)]
pub struct ReconstructArgs {
    #[arg(long, num_args = 1.., required = true)]
    pub images: Vec<PathBuf>,
    #[arg(long)]
    pub signals: Option<PathBuf>,
    #[command(flatten)]
    pub config: ConfigArg,
    #[arg(long)]
    pub mode: Option<ReconMode>,
    #[arg(long)]
    pub gt: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Run directory; `runs/reconstruct-<time>` by default.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub force: bool,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub pred: PathBuf,
    #[arg(long)]
    pub gt: PathBuf,
    #[command(flatten)]
    pub config: ConfigArg,
    #[arg(long)]
    pub voxels: Option<usize>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub force: bool,
}

#[derive(Debug, Args)]
pub struct PipelineArgs {
    /// Scene mesh; it is both the simulated object and the ground truth.
    #[arg(long)]
    pub scene: PathBuf,
    #[command(flatten)]
    pub config: ConfigArg,
    #[arg(long)]
    pub mode: Option<ReconMode>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Run directory; `runs/pipeline-<time>` by default.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Validate the configuration and inputs, then stop.
    #[arg(long)]
    pub dry_run: bool,
    /// Replace an existing run directory.
    #[arg(long, conflicts_with = "resume")]
    pub force: bool,
    /// Continue a run, skipping steps whose recorded outputs are intact.
    #[arg(long)]
    pub resume: bool,
}

#[derive(Debug, Args)]
pub struct GradcheckArgs {
    #[command(flatten)]
    pub config: ConfigArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Number of random problems per loss; 0 prints an empty table.
    #[arg(long, visible_alias = "iterations", default_value_t = 20)]
    pub seeds: usize,
    /// Overrides the soft visibility sharpness.
    #[arg(long)]
    pub kappa: Option<f64>,
    /// Also write the table as JSON.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MakeSceneArgs {
    #[arg(long)]
    pub out: PathBuf,
    /// Semi-axes in meters.
    #[arg(long, value_delimiter = ',', num_args = 3, default_values_t = [0.05, 0.04, 0.03])]
    pub axes: Vec<f64>,
    /// Icosphere subdivision level.
    #[arg(long, default_value_t = 4)]
    pub level: u32,
    #[arg(long)]
    pub force: bool,
}

pub fn version_text() -> String {
    format!(
        "echomesh {}\nconfig schema {}\nartifact format {}\nmetrics schema {}\nmanifest {}\n",
        manifest::TOOL_VERSION,
        echomesh::config::CONFIG_SCHEMA_VERSION,
        echomesh::io::FORMAT_VERSION,
        echomesh::metrics::METRICS_SCHEMA_VERSION,
        manifest::MANIFEST_VERSION
    )
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> CliResult<()>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) if matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand) => {
            print!("{e}");
            return Ok(());
        }
        Err(e) => return Err(CliError::Usage(e.to_string().lines().next().unwrap_or("").to_string())),
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be >= 1".into()));
        }
        // A second call in the same process keeps the first pool.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    if cli.version {
        print!("{}", version_text());
        return Ok(());
    }
    match cli.command {
        None => Err(CliError::Usage("no command given".into())),
        Some(Command::Simulate(a)) => commands::simulate(&a),
        Some(Command::Image(a)) => commands::image(&a),
        Some(Command::Reconstruct(a)) => commands::reconstruct(&a).map(|_| ()),
        Some(Command::Evaluate(a)) => commands::evaluate(&a),
        Some(Command::Pipeline(a)) => commands::pipeline(&a).map(|_| ()),
        Some(Command::Gradcheck(a)) => commands::gradcheck(&a),
        Some(Command::MakeScene(a)) => commands::make_scene(&a),
    }
}
