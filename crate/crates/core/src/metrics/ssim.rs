use image::RgbImage;

use super::check_pair;
use crate::{Error, Result};

/// Per-scale weights, finest scale first.
pub const MS_SSIM_WEIGHTS: [f64; 5] = [0.0448, 0.2856, 0.3001, 0.2363, 0.1333];

#[derive(Clone, Debug, PartialEq)]
pub struct MsSsimParams {
    /// One weight per scale; the scale count is the length.
    pub weights: Vec<f64>,
    /// Side of the Gaussian window.
    pub window: usize,
    pub sigma: f64,
    pub k1: f64,
    pub k2: f64,
}

impl Default for MsSsimParams {
    fn default() -> Self {
        MsSsimParams { weights: MS_SSIM_WEIGHTS.to_vec(), window: 11, sigma: 1.5, k1: 0.01, k2: 0.03 }
    }
}

impl MsSsimParams {
    /// The default parameters truncated to `scales` levels, weights
    /// renormalized to sum to one.
    pub fn with_scales(scales: usize) -> Self {
        let scales = scales.clamp(1, MS_SSIM_WEIGHTS.len());
        let w = &MS_SSIM_WEIGHTS[..scales];
        let total: f64 = w.iter().sum();
        MsSsimParams { weights: w.iter().map(|v| v / total).collect(), ..Default::default() }
    }
}

/// Largest scale count whose coarsest level still fits the window.
pub fn max_scales(width: u32, height: u32, window: usize) -> usize {
    let min = width.min(height) as usize;
    let mut s = 0;
    while window > 0 && window << s <= min {
        s += 1;
    }
    s
}

fn gaussian(window: usize, sigma: f64) -> Vec<f64> {
    let c = (window as f64 - 1.0) / 2.0;
    let g: Vec<f64> = (0..window).map(|i| (-(i as f64 - c).powi(2) / (2.0 * sigma * sigma)).exp()).collect();
    let s: f64 = g.iter().sum();
    g.into_iter().map(|v| v / s).collect()
}

struct Plane {
    w: usize,
    h: usize,
    data: Vec<f64>,
}

impl Plane {
    fn downsample(&self) -> Plane {
        let (w, h) = (self.w / 2, self.h / 2);
        let mut data = Vec::with_capacity(w * h);
        for y in 0..h {
            for x in 0..w {
                let at = |dx: usize, dy: usize| self.data[(2 * y + dy) * self.w + 2 * x + dx];
                data.push((at(0, 0) + at(1, 0) + at(0, 1) + at(1, 1)) / 4.0);
            }
        }
        Plane { w, h, data }
    }

    /// Valid-mode separable filtering.
    fn filter(&self, k: &[f64]) -> Plane {
        let n = k.len();
        let (ow, oh) = (self.w + 1 - n, self.h + 1 - n);
        let mut tmp = vec![0.0; ow * self.h];
        for y in 0..self.h {
            for x in 0..ow {
                tmp[y * ow + x] = k.iter().enumerate().map(|(i, kv)| kv * self.data[y * self.w + x + i]).sum();
            }
        }
        let mut data = vec![0.0; ow * oh];
        for y in 0..oh {
            for x in 0..ow {
                data[y * ow + x] = k.iter().enumerate().map(|(i, kv)| kv * tmp[(y + i) * ow + x]).sum();
            }
        }
        Plane { w: ow, h: oh, data }
    }

    fn map2(&self, other: &Plane, f: impl Fn(f64, f64) -> f64) -> Plane {
        Plane { w: self.w, h: self.h, data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect() }
    }
}

/// Mean luminance and contrast-structure terms at one scale.
fn ssim_terms(x: &Plane, y: &Plane, kernel: &[f64], c1: f64, c2: f64) -> (f64, f64) {
    let mx = x.filter(kernel);
    let my = y.filter(kernel);
    let exx = x.map2(x, |a, b| a * b).filter(kernel);
    let eyy = y.map2(y, |a, b| a * b).filter(kernel);
    let exy = x.map2(y, |a, b| a * b).filter(kernel);
    let n = mx.data.len() as f64;
    let (mut lum, mut cs) = (0.0, 0.0);
    for i in 0..mx.data.len() {
        let (ux, uy) = (mx.data[i], my.data[i]);
        let vx = exx.data[i] - ux * ux;
        let vy = eyy.data[i] - uy * uy;
        let cov = exy.data[i] - ux * uy;
        lum += (2.0 * ux * uy + c1) / (ux * ux + uy * uy + c1);
        cs += (2.0 * cov + c2) / (vx + vy + c2);
    }
    (lum / n, cs / n)
}

fn channel(img: &RgbImage, c: usize) -> Plane {
    Plane {
        w: img.width() as usize,
        h: img.height() as usize,
        data: img.as_raw().iter().skip(c).step_by(3).map(|&v| v as f64 / 255.0).collect(),
    }
}

/// Multi-scale structural similarity, averaged over the three channels.
///
/// Each scale contributes its mean contrast-structure term; the coarsest also
/// contributes mean luminance. Terms are clamped at zero before the weighted
/// geometric combination, so the value lies in `[0, 1]` and anti-correlated
/// images score `0`.
pub fn ms_ssim(reference: &RgbImage, test: &RgbImage, params: &MsSsimParams) -> Result<f64> {
    check_pair(reference, test)?;
    let scales = params.weights.len();
    if scales == 0 || params.window == 0 || !(params.sigma > 0.0) {
        return Err(Error::Argument("MS-SSIM needs at least one scale, a window and sigma > 0".into()));
    }
    let feasible = max_scales(reference.width(), reference.height(), params.window);
    if scales > feasible {
        return Err(Error::Argument(format!(
            "{}x{} image supports at most {feasible} MS-SSIM scales with a {} px window, {scales} requested",
            reference.width(),
            reference.height(),
            params.window
        )));
    }
    let kernel = gaussian(params.window, params.sigma);
    let (c1, c2) = (params.k1 * params.k1, params.k2 * params.k2);
    let mut total = 0.0;
    for c in 0..3 {
        let (mut x, mut y) = (channel(reference, c), channel(test, c));
        let mut value = 1.0;
        for (s, &w) in params.weights.iter().enumerate() {
            let (lum, cs) = ssim_terms(&x, &y, &kernel, c1, c2);
            value *= cs.max(0.0).powf(w);
            if s + 1 == scales {
                value *= lum.max(0.0).powf(w);
            } else {
                x = x.downsample();
                y = y.downsample();
            }
        }
        total += value;
    }
    Ok(total / 3.0)
}

/// MS-SSIM with the default window, using as many of the five default scales
/// as the image allows and renormalizing their weights.
pub fn ms_ssim_adaptive(reference: &RgbImage, test: &RgbImage) -> Result<f64> {
    check_pair(reference, test)?;
    let scales = max_scales(reference.width(), reference.height(), MsSsimParams::default().window);
    if scales == 0 {
        return Err(Error::Argument(format!(
            "{}x{} image is smaller than the MS-SSIM window",
            reference.width(),
            reference.height()
        )));
    }
    ms_ssim(reference, test, &MsSsimParams::with_scales(scales))
}
