//! Command-line front end tying model generation, synthetic scenes, tracking,
//! refinement, evaluation and overlay rendering into reproducible runs.
//!
//! Every run resolves its configuration, executes, and writes a
//! `run_manifest.ini` into the output directory; re-running a subcommand with
//! the manifest as its config reproduces the outputs byte-identically.
//! The `ICG_THREADS` environment variable caps internal parallelism
//! (default 1, keeping per-frame tracking on a single core).

pub mod commands;
pub mod config;

use std::path::PathBuf;
use std::sync::Once;

use clap::{Parser, Subcommand};

use commands::MetricSelection;

#[derive(Parser)]
#[command(name = "icg", version, about = "Region- and depth-fused 6DoF object tracking")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the sparse viewpoint model for a mesh.
    GenerateModel {
        #[arg(long)]
        config: PathBuf,
        /// Override the [model] seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Render a synthetic RGB-D sequence with ground truth.
    GenerateScene {
        #[arg(long)]
        config: PathBuf,
        /// Override the [scene] seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Track an image sequence and write the estimated trajectory.
    Track {
        #[arg(long)]
        config: PathBuf,
    },
    /// Refine the poses of an input trajectory.
    Refine {
        #[arg(long)]
        config: PathBuf,
    },
    /// Compare estimated and ground-truth trajectories.
    Evaluate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum, default_value = "all")]
        metric: MetricSelection,
        /// Also write per-frame ADD/ADD-S errors as CSV.
        #[arg(long)]
        per_frame_csv: Option<PathBuf>,
    },
    /// Draw projected contour points over the color frames.
    Overlay {
        #[arg(long)]
        config: PathBuf,
    },
}

fn init_thread_pool() {
    static INIT: Once = Once::new();
    INIT.call_once(|| {
        let threads = std::env::var("ICG_THREADS")
            .ok()
            .and_then(|v| v.parse::<usize>().ok())
            .filter(|&n| n > 0)
            .unwrap_or(1);
        // Ignore failure: a pool may already exist in-process (tests).
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    });
}

/// Parses arguments and runs the selected subcommand; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(err) => {
            let code = err.exit_code();
            let _ = err.print();
            return code;
        }
    };
    init_thread_pool();

    let result = match &cli.command {
        Command::GenerateModel { config, seed } => {
            config::load_config(config).and_then(|c| commands::generate_model_cmd(&c, *seed))
        }
        Command::GenerateScene { config, seed } => {
            config::load_config(config).and_then(|c| commands::generate_scene_cmd(&c, *seed))
        }
        Command::Track { config } => {
            config::load_config(config).and_then(|c| commands::track_cmd(&c))
        }
        Command::Refine { config } => {
            config::load_config(config).and_then(|c| commands::refine_cmd(&c))
        }
        Command::Evaluate { config, metric, per_frame_csv } => config::load_config(config)
            .and_then(|c| {
                commands::evaluate_cmd(&c, *metric, per_frame_csv.as_deref()).map(|_| ())
            }),
        Command::Overlay { config } => {
            config::load_config(config).and_then(|c| commands::overlay_cmd(&c))
        }
    };

    match result {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("error: {err:#}");
            1
        }
    }
}
