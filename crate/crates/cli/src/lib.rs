//! Command-line surface for `pointmatch`.
//!
//! Every subcommand reads JSON-lines annotations and writes a report to
//! stdout, as CSV (default) or JSON. Reports start with a version header
//! (`# pm <version>` for CSV, a `"version"` field for JSON); everything
//! after it is deterministic for fixed inputs. Images are processed in
//! parallel and reported sorted by `image_id`.

mod commands;
mod report;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub use report::VERSION_HEADER;

#[derive(Debug, Parser)]
#[command(
    name = "pm",
    version,
    about = "Point matching, TTC loss and counting experiments"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Default)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Flat `key = value` configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Overrides the configuration seed.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct PairedInputs {
    /// Ground-truth annotations (JSON lines).
    #[arg(long)]
    pub gt: PathBuf,
    /// Predictions with confidences (JSON lines).
    #[arg(long)]
    pub pred: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Hungarian matching of predictions to ground truth, per image.
    Match {
        #[command(flatten)]
        inputs: PairedInputs,
        #[command(flatten)]
        common: Common,
    },
    /// Loss components under the stored matching, per image.
    Loss {
        #[command(flatten)]
        inputs: PairedInputs,
        /// Loss variant, e.g. `HSL1+WCE+HRC`.
        #[arg(long, default_value = "HSL1+WCE+HRC")]
        variant: String,
        #[command(flatten)]
        common: Common,
    },
    /// Count MAE / MSE (root-mean-square) over a dataset.
    Eval {
        #[command(flatten)]
        inputs: PairedInputs,
        #[command(flatten)]
        common: Common,
    },
    /// Generate synthetic scenes, optionally with annotation noise.
    Gen {
        /// Output file for the clean scenes.
        #[arg(long)]
        out: PathBuf,
        /// Output file for the noisy annotations.
        #[arg(long)]
        noisy_out: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        scenes: usize,
        #[arg(long, default_value_t = 256)]
        width: u32,
        #[arg(long, default_value_t = 256)]
        height: u32,
        #[arg(long, default_value_t = 50)]
        points: usize,
        #[arg(long, value_enum, default_value_t = DistributionArg::Uniform)]
        distribution: DistributionArg,
        #[arg(long, default_value_t = 5)]
        clusters: usize,
        /// Cluster spread in pixels (default: 8% of the shorter side).
        #[arg(long)]
        spread: Option<f64>,
        /// Gaussian label jitter in pixels.
        #[arg(long, default_value_t = 0.0)]
        jitter: f64,
        /// Probability of dropping each annotation.
        #[arg(long, default_value_t = 0.0)]
        deletion_rate: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Fit a free proposal set to one scene and print the loss trace.
    Fit {
        #[arg(long)]
        gt: PathBuf,
        /// Scene to fit (default: the first record).
        #[arg(long)]
        image_id: Option<String>,
        #[command(flatten)]
        size: SizeArgs,
        #[arg(long, default_value = "HSL1+WCE+HRC")]
        variant: String,
        /// Overrides the configured step count.
        #[arg(long)]
        steps: Option<usize>,
        /// Print every k-th step (the last step is always printed).
        #[arg(long, default_value_t = 100)]
        every: usize,
        /// Write the fitted proposals as a prediction file.
        #[arg(long)]
        pred_out: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Run the loss-ablation grid on a scene suite.
    Ablate {
        /// Clean scenes (default: a generated suite of 10 scenes).
        #[arg(long)]
        gt: Option<PathBuf>,
        #[command(flatten)]
        size: SizeArgs,
        /// Number of seeds per scene.
        #[arg(long, default_value_t = 20)]
        seeds: u64,
        #[arg(long, default_value_t = 3.0)]
        jitter: f64,
        #[arg(long, default_value_t = 0.1)]
        deletion_rate: f64,
        /// Comma-separated variants (default: the ten-row grid).
        #[arg(long, value_delimiter = ',')]
        variants: Vec<String>,
        #[arg(long)]
        steps: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Compare density-map integrals with point counts.
    Density {
        #[arg(long)]
        gt: PathBuf,
        #[command(flatten)]
        size: SizeArgs,
        /// Kernel standard deviation in pixels.
        #[arg(long, default_value_t = 4.0)]
        sigma: f64,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
}

/// Image size for records that do not carry `width`/`height`.
#[derive(Debug, Args, Clone, Copy)]
pub struct SizeArgs {
    #[arg(long)]
    pub width: Option<u32>,
    #[arg(long)]
    pub height: Option<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DistributionArg {
    Uniform,
    Clustered,
}

/// Parses `args` (including the program name), runs the command and
/// returns the process exit code. Diagnostics go to `err`.
pub fn cli_dispatch<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let rendered = e.render().to_string();
            if code == 0 {
                let _ = write!(out, "{rendered}");
            } else {
                let _ = write!(err, "{rendered}");
            }
            return code;
        }
    };
    if let Err(e) = configure_threads() {
        let _ = writeln!(err, "error: {e:#}");
        return 1;
    }
    match commands::run(cli.command) {
        Ok(text) => match out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
            Ok(()) => 0,
            Err(e) => {
                let _ = writeln!(err, "error: writing output: {e}");
                1
            }
        },
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            1
        }
    }
}

/// Sizes the global rayon pool from `PM_THREADS`, once per process.
fn configure_threads() -> anyhow::Result<()> {
    static INIT: std::sync::Once = std::sync::Once::new();
    let mut result = Ok(());
    INIT.call_once(|| {
        if let Ok(raw) = std::env::var("PM_THREADS") {
            result = raw
                .trim()
                .parse::<usize>()
                .map_err(|_| anyhow::anyhow!("PM_THREADS must be a positive integer, got `{raw}`"))
                .and_then(|n| {
                    anyhow::ensure!(n > 0, "PM_THREADS must be a positive integer");
                    rayon::ThreadPoolBuilder::new()
                        .num_threads(n)
                        .build_global()
                        .map_err(anyhow::Error::from)
                });
        }
    });
    result
}
