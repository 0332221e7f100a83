//! Image metrics on the chart and a degraded copy: pixel RMSE, L1,
//! MS-SSIM, the weighted loss, and the 4-point per-patch comparison.

use dvscolor::metrics::{patch_mse, patch_rmse, MetricSummary, PatchRow};
use dvscolor::pipeline::{color_target, color_target_patches};
use image::Rgb;

fn main() -> dvscolor::Result<()> {
    let reference = color_target();
    let test = image::ImageBuffer::from_fn(reference.width(), reference.height(), |x, y| {
        let p = reference.get_pixel(x, y).0;
        let shift = if (x + y) % 7 == 0 { 25 } else { 0 };
        Rgb([p[0].saturating_add(12), p[1], p[2].saturating_sub(shift)])
    });

    let summary = MetricSummary::compute(&reference, &test)?;
    println!("{summary}");
    println!("{}\n{}", MetricSummary::csv_header(), summary.to_csv());

    let rows = patch_mse(&reference, &test, &color_target_patches())?;
    print!("{}", PatchRow::table(&rows));
    println!("patch RMSE {:.3}", patch_rmse(&rows));
    Ok(())
}
