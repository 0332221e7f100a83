use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use dvscolor::calib::{HarrisParams, RansacParams};
use dvscolor::pipeline::*;
use dvscolor::{Error, Result};

/// Event-camera color reconstruction pipeline.
///
/// Log verbosity follows RUST_LOG (e.g. RUST_LOG=debug).
#[derive(Parser)]
#[command(name = "dvscolor", version)]
struct Cli {
    /// TOML pipeline configuration.
    #[arg(long, global = true, env = "DVSCOLOR_CONFIG")]
    config: Option<PathBuf>,
    /// Overrides the configured random seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides the configured pseudo-frame rate.
    #[arg(long, global = true)]
    fps: Option<f64>,
    /// Directory for default output paths.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a scene image under the flicker schedule.
    Simulate {
        scene: Option<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Summarize an event file.
    Stats {
        events: PathBuf,
        /// Recording length; defaults to the schedule duration.
        #[arg(long)]
        duration_us: Option<u64>,
    },
    /// Bin events into pseudo-frames.
    Bin {
        events: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Detect integration windows in a frame stack.
    Detect {
        frames: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Average window responses into per-pixel feature vectors.
    Features {
        frames: PathBuf,
        windows: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Fit the linear color model.
    Fit {
        features: PathBuf,
        labels: PathBuf,
        /// all | checkerboard
        #[arg(long, default_value = "all")]
        mask: FitMask,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Apply a fitted model.
    Reconstruct {
        features: PathBuf,
        model: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Compare two images, optionally per patch.
    Eval {
        reference: PathBuf,
        test: PathBuf,
        #[arg(long)]
        patches: Option<PathBuf>,
        #[arg(long)]
        csv: bool,
    },
    /// Estimate a homography from point correspondences.
    Calibrate {
        correspondences: PathBuf,
        #[arg(long, default_value_t = RansacParams::default().iterations)]
        iterations: usize,
        #[arg(long, default_value_t = RansacParams::default().tolerance)]
        tolerance: f64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// List Harris corners of an image.
    Corners {
        image: PathBuf,
        #[arg(long, default_value_t = HarrisParams::default().k)]
        k: f64,
        #[arg(long, default_value_t = HarrisParams::default().window_radius)]
        window_radius: usize,
        /// Fraction of the strongest response.
        #[arg(long, default_value_t = HarrisParams::default().threshold)]
        threshold: f64,
        #[arg(long, default_value_t = HarrisParams::default().nms_radius)]
        nms_radius: usize,
        #[arg(long, default_value_t = 100)]
        limit: usize,
    },
    /// Warp an image into sensor coordinates.
    Warp {
        image: PathBuf,
        homography: PathBuf,
        #[arg(long)]
        width: u32,
        #[arg(long)]
        height: u32,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Normalized loss across an illumination grid.
    Sweep {
        #[arg(long, default_value = "ambient")]
        axis: SweepAxis,
        /// Comma-separated grid; defaults to the configured one.
        #[arg(long, value_delimiter = ',')]
        grid: Option<Vec<f64>>,
        #[arg(long)]
        scene: Option<PathBuf>,
        #[arg(long)]
        csv: bool,
    },
    /// Export simulated recordings as a training set.
    ExportDataset {
        #[arg(required = true)]
        scenes: Vec<PathBuf>,
        /// One label image per scene; the scene itself by default.
        #[arg(long, num_args = 1..)]
        labels: Option<Vec<PathBuf>>,
        /// Homography mapping label coordinates into sensor coordinates.
        #[arg(long)]
        homography: Option<PathBuf>,
    },
    /// Write the bundled color chart and its patch file.
    Target,
    /// Print the effective configuration.
    Config,
}

fn config(cli: &Cli) -> Result<PipelineConfig> {
    let mut cfg = match &cli.config {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(f) = cli.fps {
        cfg.fps = f;
    }
    if let Some(o) = &cli.out {
        cfg.paths.out = Some(o.clone());
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<String> {
    let cfg = config(&cli)?;
    let out = cfg.out_dir();
    let or = |p: &Option<PathBuf>, name: &str| p.clone().unwrap_or_else(|| out.join(name));
    match &cli.command {
        Command::Simulate { scene, output } => {
            let scene = scene
                .clone()
                .or_else(|| cfg.paths.scene.clone())
                .ok_or_else(|| Error::Argument("no scene given and none configured".into()))?;
            cmd_simulate(&cfg, &scene, &or(output, "events.evt"))
        }
        Command::Stats { events, duration_us } => cmd_stats(&cfg, events, *duration_us),
        Command::Bin { events, output } => cmd_bin(&cfg, events, &or(output, "frames.frs")),
        Command::Detect { frames, output } => cmd_detect(&cfg, frames, &or(output, "windows.txt")),
        Command::Features { frames, windows, output } => cmd_features(frames, windows, &or(output, "features.fea")),
        Command::Fit { features, labels, mask, output } => cmd_fit(features, labels, *mask, &or(output, "model.txt")),
        Command::Reconstruct { features, model, output } => {
            cmd_reconstruct(features, model, &or(output, "reconstruction.png"))
        }
        Command::Eval { reference, test, patches, csv } => {
            let patches = patches.clone().or_else(|| cfg.paths.patches.clone());
            cmd_eval(reference, test, patches.as_deref(), *csv)
        }
        Command::Calibrate { correspondences, iterations, tolerance, output } => {
            let params = RansacParams { iterations: *iterations, tolerance: *tolerance, seed: cfg.seed };
            cmd_calibrate(correspondences, &params, &or(output, "homography.txt"))
        }
        Command::Corners { image, k, window_radius, threshold, nms_radius, limit } => {
            let params =
                HarrisParams { k: *k, window_radius: *window_radius, threshold: *threshold, nms_radius: *nms_radius };
            cmd_corners(image, &params, *limit)
        }
        Command::Warp { image, homography, width, height, output } => {
            cmd_warp(image, homography, *width, *height, &or(output, "warped.png"))
        }
        Command::Sweep { axis, grid, scene, csv } => {
            let scene = scene.clone().or_else(|| cfg.paths.scene.clone());
            cmd_sweep(&cfg, scene.as_deref(), *axis, grid.as_deref(), *csv)
        }
        Command::ExportDataset { scenes, labels, homography } => {
            cmd_export_dataset(&cfg, scenes, labels.as_deref(), homography.as_deref(), &out.join("dataset"))
        }
        Command::Target => cmd_target(&out),
        Command::Config => Ok(cfg.to_toml()),
    }
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(report) => {
            print!("{report}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_usage() { 2 } else { 1 })
        }
    }
}
