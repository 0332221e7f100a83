use std::fmt::Write as _;

use image::RgbImage;

use super::{analyze, checkerboard_mask, PipelineConfig};
use crate::metrics::combined_loss;
use crate::recon::{apply, fit_from_images};
use crate::sim::{simulate, SceneReflectance};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepAxis {
    Ambient,
    IntensityScale,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::Ambient => "ambient",
            SweepAxis::IntensityScale => "intensity_scale",
        }
    }

    fn set(self, cfg: &mut PipelineConfig, value: f64) {
        match self {
            SweepAxis::Ambient => cfg.illumination.ambient = value,
            SweepAxis::IntensityScale => cfg.illumination.intensity_scale = value,
        }
    }
}

impl std::str::FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ambient" => Ok(SweepAxis::Ambient),
            "intensity_scale" | "intensity-scale" | "distance" => Ok(SweepAxis::IntensityScale),
            _ => Err(Error::Argument(format!("unknown sweep axis '{s}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub loss: f64,
    /// `loss` divided by the first grid point's loss.
    pub normalized: f64,
}

/// Reconstruction quality along one illumination axis.
///
/// The linear model is fitted once, on the checkerboard half of the pixels
/// recorded at the first grid point, and then applied unchanged to the
/// recordings at every grid point. Losses are over the whole frame.
pub fn run_sweep(scene: &RgbImage, cfg: &PipelineConfig, axis: SweepAxis, grid: &[f64]) -> Result<Vec<SweepRow>> {
    if grid.is_empty() {
        return Err(Error::Argument("sweep grid is empty".into()));
    }
    let reflectance = SceneReflectance::from_rgb_image(scene)?;
    let mut model = None;
    let mut rows: Vec<SweepRow> = Vec::with_capacity(grid.len());
    for &value in grid {
        let mut point = cfg.clone();
        axis.set(&mut point, value);
        point.validate()?;
        let stream = simulate(&reflectance, &point.schedule, &point.sensor, &point.sim_config())?;
        let analysis = analyze(&stream, &point)?;
        let model = match &model {
            Some(m) => m,
            None => {
                let mask = checkerboard_mask(reflectance.resolution());
                model.insert(fit_from_images(&analysis.features, scene, Some(&mask))?)
            }
        };
        let loss = combined_loss(scene, &apply(model, &analysis.features)?)?;
        log::info!("{} = {value}: loss {loss:.6}", axis.name());
        rows.push(SweepRow { value, loss, normalized: 0.0 });
    }
    let base = rows[0].loss;
    for r in &mut rows {
        r.normalized = if base > 0.0 { r.loss / base } else if r.loss == 0.0 { 1.0 } else { f64::INFINITY };
    }
    Ok(rows)
}

/// Text table, or CSV when `csv` is set.
pub fn format_sweep(rows: &[SweepRow], axis: SweepAxis, csv: bool) -> String {
    let mut out = String::new();
    if csv {
        let _ = writeln!(out, "{},loss,normalized_loss", axis.name());
        for r in rows {
            let _ = writeln!(out, "{},{},{}", r.value, r.loss, r.normalized);
        }
    } else {
        let _ = writeln!(out, "{:<18}{:>12}{:>18}", axis.name(), "loss", "normalized loss");
        for r in rows {
            let _ = writeln!(out, "{:<18}{:>12.5}{:>18.2}", r.value, r.loss, r.normalized);
        }
    }
    out
}
