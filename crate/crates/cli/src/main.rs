mod commands;
mod output;
mod studyfile;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// IMEX-MRI-GARK multirate integrators: order checks, convergence studies,
/// stability regions and single runs.
#[derive(Debug, Parser)]
#[command(name = "imex-mri", version)]
pub struct Cli {
    /// Output format.
    #[arg(long, value_enum, global = true, default_value_t = Format::Csv)]
    pub format: Format,

    /// Write the main output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Worker threads for ladders and rasters (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Pass tolerance for `check`, membership tolerance for `stability`,
    /// Newton absolute tolerance for `converge` and `integrate`.
    #[arg(long, global = true)]
    pub tolerance: Option<f64>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Verify order conditions of a catalog method or a scheme JSON file.
    Check(CheckArgs),
    /// Run a step-size ladder and fit the convergence rate.
    Converge(ConvergeArgs),
    /// Rasterize a joint stability region.
    Stability(StabilityArgs),
    /// Integrate a test problem with one fixed step size.
    Integrate(IntegrateArgs),
    /// List catalog methods.
    List,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    /// Catalog name or path to a scheme JSON document.
    pub method: String,
    /// Order to check (default: the declared order, 3 for files).
    #[arg(long)]
    pub order: Option<usize>,
}

/// Flags shared by `converge` and `integrate`; each overrides the study file.
#[derive(Debug, Args)]
pub struct RunArgs {
    /// JSON study file.
    #[arg(long)]
    pub study: Option<PathBuf>,
    #[arg(long)]
    pub method: Option<String>,
    /// kpr or brusselator.
    #[arg(long)]
    pub problem: Option<String>,
    /// Inner fast table (catalog name).
    #[arg(long)]
    pub inner: Option<String>,
    /// Fast substeps per slow stage.
    #[arg(long)]
    pub substeps: Option<usize>,
    /// Brusselator grid points.
    #[arg(long)]
    pub grid_points: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ConvergeArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Explicit comma-separated step sizes (strictly decreasing).
    #[arg(long, value_delimiter = ',')]
    pub steps: Option<Vec<f64>>,
    /// Ladder `base / 2^k`.
    #[arg(long)]
    pub base: Option<f64>,
    #[arg(long)]
    pub k_min: Option<i32>,
    #[arg(long)]
    pub k_max: Option<i32>,
    /// Reference DIRK step for problems without an exact solution.
    #[arg(long)]
    pub reference_step: Option<f64>,
    /// First ladder index used in the fit.
    #[arg(long)]
    pub fit_first: Option<usize>,
    /// Last ladder index used in the fit.
    #[arg(long)]
    pub fit_last: Option<usize>,
}

#[derive(Debug, Args)]
pub struct IntegrateArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Slow step size.
    #[arg(long)]
    pub step: Option<f64>,
    #[arg(long)]
    pub final_time: Option<f64>,
    /// Comma-separated output times.
    #[arg(long, value_delimiter = ',')]
    pub output_times: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
pub struct StabilityArgs {
    /// Catalog coupling scheme or scheme JSON file.
    pub method: String,
    /// JSON study file.
    #[arg(long)]
    pub study: Option<PathBuf>,
    /// Fast sector half-angle in degrees.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Implicit sector half-angle in degrees.
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub re_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub re_max: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub im_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub im_max: Option<f64>,
    #[arg(long)]
    pub n_re: Option<usize>,
    #[arg(long)]
    pub n_im: Option<usize>,
    /// Comma-separated sector radii (default: 12 log-spaced in [1e-2, 1e3]).
    #[arg(long, value_delimiter = ',')]
    pub radii: Option<Vec<f64>>,
    /// Rays on each side of the negative real axis.
    #[arg(long)]
    pub rays: Option<usize>,
    /// Also report the real-axis extent.
    #[arg(long)]
    pub extent: bool,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match commands::run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
