//! Register an RGB view to sensor coordinates: Harris corners on both
//! images, a robust homography from noisy matches, and the inverse warp.

use dvscolor::calib::{
    estimate_homography_ransac, harris_corners, warp_image, Correspondence, HarrisParams, Homography, RansacParams,
};
use image::{GrayImage, Luma};
use nalgebra::Matrix3;
use rand::{Rng, SeedableRng};

fn checkerboard(w: u32, h: u32) -> GrayImage {
    GrayImage::from_fn(w, h, |x, y| {
        let inside = (16..w - 16).contains(&x) && (16..h - 16).contains(&y);
        Luma([if inside && ((x - 16) / 16 + (y - 16) / 16) % 2 == 0 { 220 } else { 30 }])
    })
}

fn main() -> dvscolor::Result<()> {
    let rgb_view = checkerboard(128, 96);
    let truth = Homography::new(Matrix3::new(0.92, 0.06, 5.0, -0.04, 0.95, 3.0, 1e-4, 2e-4, 1.0))?;
    let sensor_view = warp_image(&rgb_view, &truth.inverse()?, 128, 96)?;

    let params = HarrisParams::default();
    let a = harris_corners(&rgb_view, &params)?;
    let b = harris_corners(&sensor_view, &params)?;
    println!("{} corners in the RGB view, {} in the sensor view", a.len(), b.len());

    // matches from a known mapping plus 30% gross mismatches
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
    let corr: Vec<Correspondence> = a
        .iter()
        .filter_map(|c| {
            let (u, v) = truth.apply(c.x as f64, c.y as f64)?;
            Some(if rng.random_bool(0.3) {
                Correspondence::new(c.x as f64, c.y as f64, rng.random_range(0.0..128.0), rng.random_range(0.0..96.0))
            } else {
                Correspondence::new(c.x as f64, c.y as f64, u, v)
            })
        })
        .collect();
    let fit = estimate_homography_ransac(&corr, &RansacParams::default())?;
    println!("{} of {} matches are inliers", fit.inlier_count(), corr.len());
    print!("{}", fit.homography.to_text());

    let registered = warp_image(&rgb_view, &fit.homography.inverse()?, 128, 96)?;
    let mae: f64 = registered
        .pixels()
        .zip(sensor_view.pixels())
        .map(|(p, q)| (p.0[0] as f64 - q.0[0] as f64).abs())
        .sum::<f64>()
        / (128.0 * 96.0);
    println!("mean absolute difference after registration: {mae:.3}");
    Ok(())
}
