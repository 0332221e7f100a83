//! Normalized loss across ambient levels and source intensities.

use dvscolor::pipeline::{color_target, format_sweep, run_sweep, PipelineConfig, SweepAxis};

fn main() -> dvscolor::Result<()> {
    let mut cfg = PipelineConfig::default();
    cfg.sensor.threshold = 0.05;
    let scene = color_target();

    let rows = run_sweep(&scene, &cfg, SweepAxis::Ambient, &cfg.sweep.ambient)?;
    print!("{}", format_sweep(&rows, SweepAxis::Ambient, false));

    cfg.illumination.ambient = 0.05;
    let rows = run_sweep(&scene, &cfg, SweepAxis::IntensityScale, &cfg.sweep.intensity_scale)?;
    print!("\n{}", format_sweep(&rows, SweepAxis::IntensityScale, true));
    Ok(())
}
