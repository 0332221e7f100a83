//! Feature vectors of three grays with and without ambient light. Without it
//! the log response is scale-free and the grays collapse onto one vector.

use dvscolor::pipeline::{analyze, PipelineConfig};
use dvscolor::sim::{simulate, SceneReflectance};
use image::{Rgb, RgbImage};

fn main() -> dvscolor::Result<()> {
    let strips: [[u8; 3]; 6] = [[51; 3], [128; 3], [204; 3], [230, 26, 26], [26, 230, 26], [26, 26, 230]];
    let img = RgbImage::from_fn(48, 8, |x, _| Rgb(strips[(x / 8) as usize]));
    let scene = SceneReflectance::from_rgb_image(&img)?;

    for ambient in [0.0, 0.2] {
        let mut cfg = PipelineConfig::default();
        cfg.illumination.ambient = ambient;
        let stream = simulate(&scene, &cfg.schedule, &cfg.sensor, &cfg.sim_config())?;
        let a = analyze(&stream, &cfg)?;
        println!("ambient {ambient}");
        for (x, name) in [(4, "gray 0.2"), (12, "gray 0.5"), (20, "gray 0.8")] {
            let v: Vec<String> = a.features.vector_at(x, 4).iter().map(|f| format!("{f:6.3}")).collect();
            println!("  {name}: {}", v.join(" "));
        }
    }
    Ok(())
}
