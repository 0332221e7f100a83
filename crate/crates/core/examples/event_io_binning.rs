//! Simulate the bundled chart, round-trip the events through both file
//! formats, bin them into pseudo-frames and print the count curve around the
//! first transitions.

use dvscolor::aer::{bin_events, event_count_curve, parse_events, stream_stats, write_events, EventFormat};
use dvscolor::pipeline::{color_target, PipelineConfig};
use dvscolor::sim::{inject_ripple_artifact, simulate, RippleParams, SceneReflectance};

fn main() -> dvscolor::Result<()> {
    let cfg = PipelineConfig::default();
    let scene = SceneReflectance::from_rgb_image(&color_target())?;
    let stream = simulate(&scene, &cfg.schedule, &cfg.sensor, &cfg.sim_config())?;

    for format in [EventFormat::Binary, EventFormat::Text] {
        let bytes = write_events(&stream, format);
        assert_eq!(parse_events(&bytes, format, None)?, stream);
        println!("{format:?}: {} bytes", bytes.len());
    }
    let stats = stream_stats(&stream, 6_000_000)?;
    println!("{} events, {:.2} ev/pix/s, {} on / {} off", stats.events, stats.rate_per_pixel_s, stats.on_events, stats.off_events);

    let stack = bin_events(&stream, cfg.fps)?;
    let curve = event_count_curve(&stack);
    println!("{} slices of {:.2} ms", stack.len(), stack.slice_duration_s() * 1e3);
    for (k, c) in curve.iter().enumerate().take(220).skip(195) {
        println!("slice {k:>4}  {c:>6} {}", "#".repeat((*c as usize).div_ceil(100)));
    }

    let ripple = RippleParams {
        center: (48.0, 32.0),
        speed: 400.0,
        amplitude: 0.5,
        t_start: 2_500_000,
        width: 1.5,
        max_radius: 40.0,
    };
    let noisy = inject_ripple_artifact(&stream, &ripple, 1)?;
    println!("ripple adds {} events", noisy.len() - stream.len());
    Ok(())
}
