//! Export a small training set and read one tensor back.
//!
//! Each sample holds 9 x 32 pseudo-frames as little-endian f32 with a text
//! sidecar giving the shape, plus the RGB label.

use dvscolor::pipeline::{analyze, color_target, export_dataset, DatasetSample, PipelineConfig};
use dvscolor::sim::{simulate, SceneReflectance};
use image::imageops;

fn main() -> dvscolor::Result<()> {
    let mut cfg = PipelineConfig::default();
    cfg.illumination.ambient = 0.2;
    let chart = color_target();
    let scenes = [("chart", chart.clone()), ("chart_flipped", imageops::flip_horizontal(&chart)), ("chart_rotated", imageops::rotate180(&chart))];

    let mut analyses = Vec::new();
    for (_, img) in &scenes {
        let stream = simulate(&SceneReflectance::from_rgb_image(img)?, &cfg.schedule, &cfg.sensor, &cfg.sim_config())?;
        analyses.push(analyze(&stream, &cfg)?);
    }
    let samples: Vec<DatasetSample<'_>> = scenes
        .iter()
        .zip(&analyses)
        .map(|((id, img), a)| DatasetSample { id, stack: &a.stack, windows: &a.windows, label: img })
        .collect();

    let dir = std::env::temp_dir().join("dvscolor_dataset_example");
    let _ = std::fs::remove_dir_all(&dir);
    for e in export_dataset(&dir, &samples, cfg.transitions, cfg.frames_per_transition)? {
        println!("{} -> {} (padded frames: {})", e.id, e.split.name(), e.padded_frames);
    }

    let sample = dir.join("samples/chart");
    print!("{}", std::fs::read_to_string(sample.join("input.meta"))?);
    let bytes = std::fs::read(sample.join("input.f32"))?;
    let values: Vec<f32> = bytes.chunks_exact(4).map(|b| f32::from_le_bytes(b.try_into().unwrap())).collect();
    let peak = values.iter().fold(0.0f32, |m, v| m.max(v.abs()));
    println!("{} values, max |value| {peak}", values.len());
    println!("written to {}", dir.display());
    Ok(())
}
