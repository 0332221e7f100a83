//! Full round trip on the color chart: simulate, detect windows, fit the
//! linear model on half the pixels, reconstruct and score per patch.
//!
//! `cargo run --release --example linear_reconstruction [out.png]`

use dvscolor::pipeline::{color_target, color_target_patches, reconstruct, PipelineConfig};

fn main() -> dvscolor::Result<()> {
    let mut cfg = PipelineConfig::default();
    cfg.sensor.threshold = 0.05;
    cfg.illumination.ambient = 0.2;

    let spec = color_target_patches();
    let rt = reconstruct(&color_target(), &cfg, Some(&spec))?;
    println!("{} events, {} windows", rt.stream.len(), rt.analysis.windows.len());
    for w in rt.analysis.windows.iter().take(cfg.transitions) {
        println!("  transition {}: slices {}..{} ({:.1} ms)", w.transition_index, w.start_slice, w.end_slice, w.tau * 1e3);
    }
    print!("{}", rt.evaluation);

    if let Some(path) = std::env::args().nth(1) {
        rt.reconstruction.save(&path)?;
        println!("saved {path}");
    }
    Ok(())
}
