//! File-level commands. Each wraps one library operation, reads its inputs
//! from disk, writes its outputs and returns a human-readable report.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use image::RgbImage;
use sha2::{Digest, Sha256};

use super::dataset::{export_dataset, DatasetSample};
use super::run::{analyze, checkerboard_mask, evaluate, parse_windows, windows_to_text};
use super::sweep::{format_sweep, run_sweep, SweepAxis};
use super::target::{color_target, color_target_patches};
use super::PipelineConfig;
use crate::aer::{
    bin_events, event_count_curve, parse_events, stream_stats, write_events, EventFormat, EventStream, FrameStack,
};
use crate::calib::{
    estimate_homography_ransac, harris_corners, parse_correspondences, warp_image, HarrisParams, Homography,
    RansacParams,
};
use crate::metrics::PatchSpec;
use crate::recon::{apply, detect_windows, extract_features, forward_sum, fit_from_images, FeatureImage, LinearModel};
use crate::sim::{simulate, SceneReflectance};
use crate::{Error, Result};

fn read(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| std::io::Error::new(e.kind(), format!("{}: {e}", path.display())).into())
}

fn read_text(path: &Path) -> Result<String> {
    String::from_utf8(read(path)?).map_err(|e| Error::parse_byte(e.utf8_error().valid_up_to(), "file is not UTF-8"))
}

fn write(path: &Path, bytes: impl AsRef<[u8]>) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, bytes)?;
    Ok(())
}

fn save_image(img: &RgbImage, path: &Path) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    img.save(path)?;
    Ok(())
}

fn load_rgb(path: &Path) -> Result<RgbImage> {
    Ok(image::open(path)?.to_rgb8())
}

pub fn load_events(path: &Path) -> Result<EventStream> {
    parse_events(&read(path)?, EventFormat::from_path(path), None)
}

pub fn load_frames(path: &Path) -> Result<FrameStack> {
    FrameStack::from_bytes(&read(path)?)
}

pub fn load_features(path: &Path) -> Result<FeatureImage> {
    FeatureImage::from_bytes(&read(path)?)
}

pub fn load_model(path: &Path) -> Result<LinearModel> {
    LinearModel::from_text(&read_text(path)?)
}

/// Stream summary used for reports and the golden regression file.
pub fn stream_summary(stream: &EventStream, duration_us: u64) -> Result<String> {
    let s = stream_stats(stream, duration_us)?;
    let digest = Sha256::digest(write_events(stream, EventFormat::Binary));
    let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
    let mut out = String::new();
    let _ = writeln!(out, "resolution {}", stream.resolution());
    let _ = writeln!(out, "events {}", s.events);
    let _ = writeln!(out, "on_events {}", s.on_events);
    let _ = writeln!(out, "off_events {}", s.off_events);
    let _ = writeln!(out, "first_t_us {}", stream.first_time().map_or("-".into(), |t| t.to_string()));
    let _ = writeln!(out, "last_t_us {}", stream.last_time().map_or("-".into(), |t| t.to_string()));
    let _ = writeln!(out, "duration_s {:.6}", s.duration_s);
    let _ = writeln!(out, "rate_per_pixel_s {:.6}", s.rate_per_pixel_s);
    let _ = writeln!(out, "active_fraction {:.6}", s.active_fraction);
    let _ = writeln!(out, "sha256 {hex}");
    Ok(out)
}

fn schedule_duration_us(cfg: &PipelineConfig) -> u64 {
    (cfg.schedule.total_duration() * 1e6).round() as u64
}

/// Simulate a scene image; `.evt`/`.bin` outputs are binary, others text.
pub fn cmd_simulate(cfg: &PipelineConfig, scene: &Path, output: &Path) -> Result<String> {
    cfg.validate()?;
    let scene = SceneReflectance::load(scene)?;
    let stream = simulate(&scene, &cfg.schedule, &cfg.sensor, &cfg.sim_config())?;
    write(output, write_events(&stream, EventFormat::from_path(output)))?;
    stream_summary(&stream, schedule_duration_us(cfg))
}

pub fn cmd_stats(cfg: &PipelineConfig, events: &Path, duration_us: Option<u64>) -> Result<String> {
    let stream = load_events(events)?;
    stream_summary(&stream, duration_us.unwrap_or_else(|| schedule_duration_us(cfg)))
}

pub fn cmd_bin(cfg: &PipelineConfig, events: &Path, output: &Path) -> Result<String> {
    let stack = bin_events(&load_events(events)?, cfg.fps)?;
    write(output, stack.to_bytes())?;
    Ok(format!("{} slices at {} fps, {} events\n", stack.len(), stack.fps(), stack.total_events()))
}

pub fn cmd_detect(cfg: &PipelineConfig, frames: &Path, output: &Path) -> Result<String> {
    let stack = load_frames(frames)?;
    let curve = forward_sum(&event_count_curve(&stack), cfg.detection_span());
    let windows = detect_windows(&curve, stack.fps(), cfg.transitions, cfg.prominence())?;
    let text = windows_to_text(&windows, stack.fps(), cfg.transitions);
    write(output, &text)?;
    Ok(text)
}

pub fn cmd_features(frames: &Path, windows: &Path, output: &Path) -> Result<String> {
    let stack = load_frames(frames)?;
    let (windows, _, n) = parse_windows(&read_text(windows)?)?;
    let features = extract_features(&stack, &windows, n)?;
    write(output, features.to_bytes())?;
    Ok(format!("{} feature vectors of length {}\n", features.resolution().pixel_count(), features.dim()))
}

/// Which pixels to fit on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FitMask {
    All,
    Checkerboard,
}

impl std::str::FromStr for FitMask {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "all" => Ok(FitMask::All),
            "checkerboard" | "half" => Ok(FitMask::Checkerboard),
            _ => Err(Error::Argument(format!("unknown fit mask '{s}'"))),
        }
    }
}

pub fn cmd_fit(features: &Path, labels: &Path, mask: FitMask, output: &Path) -> Result<String> {
    let features = load_features(features)?;
    let labels = load_rgb(labels)?;
    let mask = match mask {
        FitMask::All => None,
        FitMask::Checkerboard => Some(checkerboard_mask(features.resolution())),
    };
    let model = fit_from_images(&features, &labels, mask.as_deref())?;
    let text = model.to_text();
    write(output, &text)?;
    Ok(text)
}

pub fn cmd_reconstruct(features: &Path, model: &Path, output: &Path) -> Result<String> {
    let img = apply(&load_model(model)?, &load_features(features)?)?;
    save_image(&img, output)?;
    Ok(format!("wrote {}x{} reconstruction to {}\n", img.width(), img.height(), output.display()))
}

pub fn cmd_eval(reference: &Path, test: &Path, patches: Option<&Path>, csv: bool) -> Result<String> {
    let spec = patches.map(|p| read_text(p).and_then(|t| PatchSpec::parse(&t))).transpose()?;
    let e = evaluate(&load_rgb(reference)?, &load_rgb(test)?, spec.as_ref())?;
    Ok(if csv { e.to_csv() } else { e.to_string() })
}

pub fn cmd_calibrate(correspondences: &Path, params: &RansacParams, output: &Path) -> Result<String> {
    let corr = parse_correspondences(&read_text(correspondences)?)?;
    let fit = estimate_homography_ransac(&corr, params)?;
    write(output, fit.homography.to_text())?;
    Ok(format!("{}{} of {} correspondences are inliers\n", fit.homography.to_text(), fit.inlier_count(), corr.len()))
}

pub fn cmd_corners(image: &Path, params: &HarrisParams, limit: usize) -> Result<String> {
    let gray = image::open(image)?.to_luma8();
    let corners = harris_corners(&gray, params)?;
    let mut out = String::from("x,y,score\n");
    for c in corners.iter().take(limit) {
        let _ = writeln!(out, "{},{},{:e}", c.x, c.y, c.score);
    }
    Ok(out)
}

pub fn cmd_warp(image: &Path, homography: &Path, width: u32, height: u32, output: &Path) -> Result<String> {
    let h = Homography::from_text(&read_text(homography)?)?;
    let img = warp_image(&load_rgb(image)?, &h, width, height)?;
    save_image(&img, output)?;
    Ok(format!("wrote {width}x{height} warped image to {}\n", output.display()))
}

/// Sweep an illumination axis. Without an explicit grid the config's grid
/// for that axis is used; without a scene the bundled color chart is.
pub fn cmd_sweep(
    cfg: &PipelineConfig,
    scene: Option<&Path>,
    axis: SweepAxis,
    grid: Option<&[f64]>,
    csv: bool,
) -> Result<String> {
    let scene = match scene {
        Some(p) => load_rgb(p)?,
        None => color_target(),
    };
    let grid = grid.unwrap_or(match axis {
        SweepAxis::Ambient => &cfg.sweep.ambient,
        SweepAxis::IntensityScale => &cfg.sweep.intensity_scale,
    });
    let rows = run_sweep(&scene, cfg, axis, grid)?;
    Ok(format_sweep(&rows, axis, csv))
}

/// Simulate every scene, pair it with its label (the scene itself unless
/// given, optionally warped into sensor coordinates) and export.
pub fn cmd_export_dataset(
    cfg: &PipelineConfig,
    scenes: &[PathBuf],
    labels: Option<&[PathBuf]>,
    homography: Option<&Path>,
    out: &Path,
) -> Result<String> {
    cfg.validate()?;
    if scenes.is_empty() {
        return Err(Error::Argument("no scenes given".into()));
    }
    if let Some(l) = labels {
        if l.len() != scenes.len() {
            return Err(Error::Argument(format!("{} scenes but {} labels", scenes.len(), l.len())));
        }
    }
    let h = homography.map(|p| read_text(p).and_then(|t| Homography::from_text(&t))).transpose()?;
    let mut prepared = Vec::with_capacity(scenes.len());
    for (i, path) in scenes.iter().enumerate() {
        let id = path
            .file_stem()
            .and_then(|s| s.to_str())
            .ok_or_else(|| Error::Argument(format!("cannot derive a sample id from {}", path.display())))?
            .to_string();
        let scene_img = load_rgb(path)?;
        let scene = SceneReflectance::from_rgb_image(&scene_img)?;
        let stream = simulate(&scene, &cfg.schedule, &cfg.sensor, &cfg.sim_config())?;
        let analysis = analyze(&stream, cfg)?;
        let label = match labels {
            Some(l) => load_rgb(&l[i])?,
            None => scene_img,
        };
        let label = match &h {
            Some(h) => warp_image(&label, h, scene.resolution().width as u32, scene.resolution().height as u32)?,
            None => label,
        };
        prepared.push((id, analysis, label));
    }
    let samples: Vec<DatasetSample<'_>> = prepared
        .iter()
        .map(|(id, a, label)| DatasetSample { id, stack: &a.stack, windows: &a.windows, label })
        .collect();
    let exported = export_dataset(out, &samples, cfg.transitions, cfg.frames_per_transition)?;
    let mut report = String::new();
    for e in &exported {
        let _ = writeln!(report, "{} {} padded={}", e.id, e.split.name(), e.padded_frames);
    }
    Ok(report)
}

/// Write the bundled 24-patch chart and its patch file.
pub fn cmd_target(out: &Path) -> Result<String> {
    let img_path = out.join("color_target.ppm");
    let spec_path = out.join("color_target.patches");
    save_image(&color_target(), &img_path)?;
    write(&spec_path, color_target_patches().to_text())?;
    Ok(format!("wrote {} and {}\n", img_path.display(), spec_path.display()))
}
