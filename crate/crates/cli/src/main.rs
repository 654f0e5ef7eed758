mod commands;
mod common;

use clap::{Parser, Subcommand};
use common::{exit_code, Globals};
use std::process::ExitCode;

/// Multi-bounce lidar simulation and analysis.
///
/// Exit status is 0 on success, 2 when an input or argument is invalid and
/// 1 when a run fails for any other reason. Set BOUNCE_THREADS to pin the
/// worker count; outputs do not depend on it.
#[derive(Parser, Debug)]
#[command(name = "bounce", version, about)]
struct Cli {
    #[command(flatten)]
    globals: Globals,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Render a scene into a transient cube plus ground-truth exports.
    Render(commands::render::Args),
    /// Generate and render a batch of procedural scenes with a manifest.
    Dataset(commands::dataset::Args),
    /// Recover depth, two-bounce ToF, shadow and specular masks from a cube.
    Demux(commands::demux::Args),
    /// Carve an occupancy grid and render novel-view depth.
    Reconstruct(commands::reconstruct::Args),
    /// Score predictions against ground truth as a JSON report.
    ///
    /// Report keys: depth_mae, boundary_f1, mask_pixel_mae, mask_iou,
    /// l_data, l_smooth, voxel_iou. Metrics without inputs are null.
    Eval(commands::eval::Args),
    /// Export light-in-flight frames from ToF maps and shadow masks.
    Lif(commands::lif::Args),
}

fn run(cli: Cli) -> anyhow::Result<()> {
    common::configure_threads()?;
    let g = &cli.globals;
    match cli.command {
        Command::Render(a) => commands::render::run(g, a),
        Command::Dataset(a) => commands::dataset::run(g, a),
        Command::Demux(a) => commands::demux::run(g, a),
        Command::Reconstruct(a) => commands::reconstruct::run(g, a),
        Command::Eval(a) => commands::eval::run(g, a),
        Command::Lif(a) => commands::lif::run(g, a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
