use std::path::Path;

use image::RgbImage;

use crate::aer::Resolution;
use crate::{Error, Result};

/// Per-pixel RGB albedo of a planar scene, every channel in `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct SceneReflectance {
    resolution: Resolution,
    albedo: Vec<[f64; 3]>,
}

impl SceneReflectance {
    pub fn new(resolution: Resolution, albedo: Vec<[f64; 3]>) -> Result<Self> {
        if albedo.len() != resolution.pixel_count() {
            return Err(Error::Argument(format!(
                "{} albedo values for a {resolution} scene",
                albedo.len()
            )));
        }
        if let Some(i) = albedo
            .iter()
            .position(|a| a.iter().any(|c| !(0.0..=1.0).contains(c)))
        {
            return Err(Error::Validation(format!(
                "albedo of pixel {i} is {:?}, channels must lie in [0, 1]",
                albedo[i]
            )));
        }
        Ok(SceneReflectance { resolution, albedo })
    }

    pub fn uniform(resolution: Resolution, rgb: [f64; 3]) -> Result<Self> {
        Self::new(resolution, vec![rgb; resolution.pixel_count()])
    }

    /// Albedo from an 8-bit RGB image, each channel divided by 255.
    pub fn from_rgb_image(img: &RgbImage) -> Result<Self> {
        let (w, h) = img.dimensions();
        let resolution = to_resolution(w, h)?;
        let albedo = img
            .pixels()
            .map(|p| p.0.map(|c| c as f64 / 255.0))
            .collect();
        Self::new(resolution, albedo)
    }

    /// Load a PNG or binary PPM (P6) scene.
    pub fn load(path: &Path) -> Result<Self> {
        let img = image::open(path)?.to_rgb8();
        Self::from_rgb_image(&img)
    }

    pub fn resolution(&self) -> Resolution {
        self.resolution
    }

    pub fn albedo(&self) -> &[[f64; 3]] {
        &self.albedo
    }

    pub fn albedo_at(&self, x: u16, y: u16) -> [f64; 3] {
        self.albedo[self.resolution.index(x, y)]
    }

    /// Ground-truth 8-bit rendering of the albedo (`round(255 a)`).
    pub fn to_rgb_image(&self) -> RgbImage {
        let Resolution { width, height } = self.resolution;
        RgbImage::from_fn(width as u32, height as u32, |x, y| {
            let a = self.albedo_at(x as u16, y as u16);
            image::Rgb(a.map(|c| (c * 255.0).round() as u8))
        })
    }
}

pub(crate) fn to_resolution(w: u32, h: u32) -> Result<Resolution> {
    if w > u16::MAX as u32 || h > u16::MAX as u32 {
        return Err(Error::Argument(format!("{w}x{h} exceeds the 16-bit sensor address range")));
    }
    Ok(Resolution::new(w as u16, h as u16))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_out_of_range_albedo() {
        let r = SceneReflectance::uniform(Resolution::new(2, 2), [0.5, 1.2, 0.0]);
        assert!(matches!(r, Err(Error::Validation(_))));
    }

    #[test]
    fn image_round_trip() {
        let img = RgbImage::from_fn(3, 2, |x, y| image::Rgb([x as u8 * 80, y as u8 * 200, 255]));
        let scene = SceneReflectance::from_rgb_image(&img).unwrap();
        assert_eq!(scene.albedo_at(1, 1), [80.0 / 255.0, 200.0 / 255.0, 1.0]);
        assert_eq!(scene.to_rgb_image(), img);
    }
}
