use std::fmt;

use image::RgbImage;

use super::{check_pair, ms_ssim_adaptive};
use crate::Result;

pub const L1_WEIGHT: f64 = 0.8;
pub const MS_SSIM_WEIGHT: f64 = 0.2;

/// Root mean squared difference over all pixels and channels, 0..255 units.
pub fn rmse(reference: &RgbImage, test: &RgbImage) -> Result<f64> {
    check_pair(reference, test)?;
    let n = reference.as_raw().len() as f64;
    let sum: f64 = reference
        .as_raw()
        .iter()
        .zip(test.as_raw())
        .map(|(&a, &b)| {
            let d = a as f64 - b as f64;
            d * d
        })
        .sum();
    Ok((sum / n).sqrt())
}

/// Mean absolute difference on `[0, 1]`-normalized images.
pub fn l1(reference: &RgbImage, test: &RgbImage) -> Result<f64> {
    check_pair(reference, test)?;
    let n = reference.as_raw().len() as f64;
    let sum: f64 = reference
        .as_raw()
        .iter()
        .zip(test.as_raw())
        .map(|(&a, &b)| (a as f64 / 255.0 - b as f64 / 255.0).abs())
        .sum();
    Ok(sum / n)
}

/// `0.8 l1 + 0.2 (1 - ms_ssim)`.
pub fn combine_loss(l1: f64, ms_ssim: f64) -> f64 {
    L1_WEIGHT * l1 + MS_SSIM_WEIGHT * (1.0 - ms_ssim)
}

/// Training loss on an image pair. MS-SSIM uses as many scales as the image
/// size allows.
pub fn combined_loss(reference: &RgbImage, test: &RgbImage) -> Result<f64> {
    Ok(combine_loss(l1(reference, test)?, ms_ssim_adaptive(reference, test)?))
}

/// All whole-image measures for one pair.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MetricSummary {
    pub rmse: f64,
    pub l1: f64,
    pub ms_ssim: f64,
    pub loss: f64,
}

impl MetricSummary {
    pub fn compute(reference: &RgbImage, test: &RgbImage) -> Result<Self> {
        let l1 = l1(reference, test)?;
        let ms_ssim = ms_ssim_adaptive(reference, test)?;
        Ok(MetricSummary { rmse: rmse(reference, test)?, l1, ms_ssim, loss: combine_loss(l1, ms_ssim) })
    }

    pub fn csv_header() -> &'static str {
        "rmse,l1,ms_ssim,loss"
    }

    pub fn to_csv(&self) -> String {
        format!("{},{},{},{}", self.rmse, self.l1, self.ms_ssim, self.loss)
    }
}

impl fmt::Display for MetricSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<10}{:>12}", "metric", "value")?;
        writeln!(f, "{:<10}{:>12.4}", "rmse", self.rmse)?;
        writeln!(f, "{:<10}{:>12.6}", "l1", self.l1)?;
        writeln!(f, "{:<10}{:>12.6}", "ms_ssim", self.ms_ssim)?;
        writeln!(f, "{:<10}{:>12.6}", "loss", self.loss)
    }
}
