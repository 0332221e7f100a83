//! Image-quality measures and the training loss.
//!
//! Pixel metrics take 8-bit RGB pairs. `rmse` reports in 0..255 units, all
//! other measures work on images normalized to `[0, 1]`.

mod patch;
mod pixel;
mod ssim;

pub use patch::{patch_mse, patch_rmse, perceived_color, sample_points, Patch, PatchRow, PatchSpec};
pub use pixel::{combine_loss, combined_loss, l1, rmse, MetricSummary, L1_WEIGHT, MS_SSIM_WEIGHT};
pub use ssim::{max_scales, ms_ssim, ms_ssim_adaptive, MsSsimParams, MS_SSIM_WEIGHTS};

use image::RgbImage;

use crate::{Error, Result};

pub(crate) fn check_pair(a: &RgbImage, b: &RgbImage) -> Result<()> {
    if a.dimensions() != b.dimensions() {
        return Err(Error::Argument(format!(
            "image sizes differ: {}x{} vs {}x{}",
            a.width(),
            a.height(),
            b.width(),
            b.height()
        )));
    }
    if a.width() == 0 || a.height() == 0 {
        return Err(Error::Argument("empty image".into()));
    }
    Ok(())
}
