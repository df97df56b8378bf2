//! `ostcal`: command-line front end for display calibration experiments.

mod commands;
mod error;
mod formats;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "ostcal", version, about = "Optical see-through display calibration by hand-cloud registration")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a synthetic hand point cloud.
    GenCloud(GenCloudArgs),
    /// Build one synthetic trial: source and target clouds plus a ground-truth sidecar.
    Simulate(SimulateArgs),
    /// Estimate the viewpoint shift between two clouds.
    Register(RegisterArgs),
    /// Run a rotational-noise sweep and write a per-trial CSV.
    Sweep(SweepArgs),
    /// Print the rendering projection updated for a viewpoint shift.
    UpdateProjection(UpdateProjectionArgs),
    /// Measure the relative rotation between two clouds against the guard threshold.
    GuardCheck(GuardCheckArgs),
}

#[derive(Debug, Args)]
struct GenCloudArgs {
    #[arg(long, default_value_t = 1000)]
    points: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Overall span of the silhouette, meters.
    #[arg(long, default_value_t = 0.18)]
    extent: f64,
    /// Half-width of the depth jitter, meters.
    #[arg(long, default_value_t = 0.01)]
    depth_jitter: f64,
    #[arg(short, long)]
    output: PathBuf,
}

/// Extrinsic `X` as 12 row-major reals `[R | t]`, from a flag or a file.
#[derive(Debug, Args)]
#[group(multiple = false)]
struct ExtrinsicArgs {
    /// 12 comma- or space-separated reals.
    #[arg(long, allow_hyphen_values = true)]
    extrinsic: Option<String>,
    #[arg(long)]
    extrinsic_file: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long, default_value_t = 1000)]
    points: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Rotational disturbance applied to the target, degrees.
    #[arg(long, default_value_t = 0.0)]
    noise_deg: f64,
    /// Ground-truth viewpoint shift in millimeters; seeded within ±20 mm when omitted.
    #[arg(long, allow_hyphen_values = true)]
    phi_mm: Option<String>,
    #[arg(long, default_value_t = 0.5)]
    phi4_tilde: f64,
    #[command(flatten)]
    extrinsic: ExtrinsicArgs,
    #[arg(long)]
    source: PathBuf,
    #[arg(long)]
    target: PathBuf,
    /// Ground-truth sidecar (TOML).
    #[arg(long)]
    truth: PathBuf,
}

#[derive(Debug, Args)]
struct RegisterArgs {
    #[arg(long)]
    source: PathBuf,
    #[arg(long)]
    target: PathBuf,
    #[arg(long)]
    profile: PathBuf,
    #[command(flatten)]
    extrinsic: ExtrinsicArgs,
    /// Ground-truth sidecar from `simulate`: supplies X when no extrinsic is given
    /// and adds the error against the embedded shift to the report.
    #[arg(long)]
    truth: Option<PathBuf>,
    #[arg(long, default_value_t = 800)]
    max_iterations: usize,
    #[arg(long, default_value_t = 0.9999)]
    convergence_ratio: f64,
    #[arg(long, default_value_t = 9.0)]
    guard_deg: f64,
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// Noise levels `start:stop:step` in degrees, stop inclusive.
    #[arg(long, default_value = "0:20:1")]
    range: String,
    #[arg(long, default_value_t = 20)]
    trials: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 1000)]
    points: usize,
    #[arg(long, default_value_t = 0.5)]
    phi4_tilde: f64,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Debug, Args)]
struct UpdateProjectionArgs {
    #[arg(long)]
    profile: PathBuf,
    /// Viewpoint shift in millimeters.
    #[arg(long, allow_hyphen_values = true, default_value = "0,0,0")]
    phi_mm: String,
}

#[derive(Debug, Args)]
struct GuardCheckArgs {
    #[arg(long)]
    source: PathBuf,
    #[arg(long)]
    target: PathBuf,
    #[arg(long, default_value_t = 9.0)]
    threshold_deg: f64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::GenCloud(a) => commands::gen_cloud(a),
        Command::Simulate(a) => commands::simulate(a),
        Command::Register(a) => commands::register(a),
        Command::Sweep(a) => commands::sweep(a),
        Command::UpdateProjection(a) => commands::update_projection(a),
        Command::GuardCheck(a) => commands::guard_check(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
