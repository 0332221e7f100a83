use image::GrayImage;
use rayon::prelude::*;

use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HarrisParams {
    /// Trace weight in `R = det(M) - k trace(M)^2`.
    pub k: f64,
    /// Radius of the Gaussian window summing the structure tensor.
    pub window_radius: usize,
    /// Minimum response as a fraction of the strongest response in the image.
    pub threshold: f64,
    /// Half-width of the non-maximum suppression neighbourhood.
    pub nms_radius: usize,
}

impl Default for HarrisParams {
    fn default() -> Self {
        HarrisParams { k: 0.04, window_radius: 2, threshold: 0.01, nms_radius: 3 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Corner {
    pub x: f64,
    pub y: f64,
    pub score: f64,
}

fn gaussian_kernel(radius: usize) -> Vec<f64> {
    let sigma = (radius as f64 / 2.0).max(0.5);
    let r = radius as isize;
    let k: Vec<f64> = (-r..=r).map(|i| (-((i * i) as f64) / (2.0 * sigma * sigma)).exp()).collect();
    let s: f64 = k.iter().sum();
    k.into_iter().map(|v| v / s).collect()
}

#[inline]
fn clamp_idx(i: isize, n: usize) -> usize {
    i.clamp(0, n as isize - 1) as usize
}

/// Sobel gradients with replicated borders, intensities scaled to `[0, 1]`.
fn sobel(img: &GrayImage) -> (Vec<f64>, Vec<f64>) {
    let (w, h) = (img.width() as usize, img.height() as usize);
    let px = |x: isize, y: isize| img.as_raw()[clamp_idx(y, h) * w + clamp_idx(x, w)] as f64 / 255.0;
    let mut gx = vec![0.0; w * h];
    let mut gy = vec![0.0; w * h];
    for y in 0..h as isize {
        for x in 0..w as isize {
            let i = y as usize * w + x as usize;
            gx[i] = (px(x + 1, y - 1) + 2.0 * px(x + 1, y) + px(x + 1, y + 1)
                - px(x - 1, y - 1)
                - 2.0 * px(x - 1, y)
                - px(x - 1, y + 1))
                / 8.0;
            gy[i] = (px(x - 1, y + 1) + 2.0 * px(x, y + 1) + px(x + 1, y + 1)
                - px(x - 1, y - 1)
                - 2.0 * px(x, y - 1)
                - px(x + 1, y - 1))
                / 8.0;
        }
    }
    (gx, gy)
}

fn smooth(data: &[f64], w: usize, h: usize, kernel: &[f64]) -> Vec<f64> {
    let r = (kernel.len() / 2) as isize;
    let mut tmp = vec![0.0; w * h];
    tmp.par_chunks_mut(w).enumerate().for_each(|(y, row)| {
        for (x, out) in row.iter_mut().enumerate() {
            *out = kernel
                .iter()
                .enumerate()
                .map(|(j, kv)| kv * data[y * w + clamp_idx(x as isize + j as isize - r, w)])
                .sum();
        }
    });
    let mut out = vec![0.0; w * h];
    out.par_chunks_mut(w).enumerate().for_each(|(y, row)| {
        for (x, o) in row.iter_mut().enumerate() {
            *o = kernel
                .iter()
                .enumerate()
                .map(|(j, kv)| kv * tmp[clamp_idx(y as isize + j as isize - r, h) * w + x])
                .sum();
        }
    });
    out
}

fn check_size(img: &GrayImage, window_radius: usize) -> Result<()> {
    let side = 2 * window_radius + 1;
    if (img.width() as usize) < side || (img.height() as usize) < side {
        return Err(Error::Argument(format!(
            "{}x{} image is smaller than the {side}x{side} corner window",
            img.width(),
            img.height()
        )));
    }
    Ok(())
}

/// Harris response map, row-major.
pub fn harris_response(img: &GrayImage, k: f64, window_radius: usize) -> Result<Vec<f64>> {
    check_size(img, window_radius)?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    let (gx, gy) = sobel(img);
    let kernel = gaussian_kernel(window_radius);
    let xx: Vec<f64> = gx.iter().map(|v| v * v).collect();
    let yy: Vec<f64> = gy.iter().map(|v| v * v).collect();
    let xy: Vec<f64> = gx.iter().zip(&gy).map(|(a, b)| a * b).collect();
    let (sxx, syy, sxy) = (smooth(&xx, w, h, &kernel), smooth(&yy, w, h, &kernel), smooth(&xy, w, h, &kernel));
    Ok((0..w * h)
        .map(|i| {
            let tr = sxx[i] + syy[i];
            sxx[i] * syy[i] - sxy[i] * sxy[i] - k * tr * tr
        })
        .collect())
}

/// Detect corners, strongest first.
///
/// A pixel is kept when its response is positive, at least `threshold`
/// times the image maximum, and the maximum of its `(2 nms_radius + 1)^2`
/// neighbourhood. Equal responses are resolved in favour of the first pixel
/// in raster order.
pub fn harris_corners(img: &GrayImage, params: &HarrisParams) -> Result<Vec<Corner>> {
    if !(params.k.is_finite() && params.threshold.is_finite() && params.threshold >= 0.0) {
        return Err(Error::Argument("Harris k and threshold must be finite, threshold >= 0".into()));
    }
    let response = harris_response(img, params.k, params.window_radius)?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    let max = response.iter().cloned().fold(0.0f64, f64::max);
    if max <= 0.0 {
        return Ok(Vec::new());
    }
    let floor = params.threshold * max;
    let r = params.nms_radius as isize;
    let mut corners: Vec<Corner> = (0..h)
        .into_par_iter()
        .flat_map_iter(|y| {
            let response = &response;
            (0..w).filter_map(move |x| {
                let v = response[y * w + x];
                if v <= 0.0 || v < floor {
                    return None;
                }
                for dy in -r..=r {
                    for dx in -r..=r {
                        let (nx, ny) = (x as isize + dx, y as isize + dy);
                        if (dx, dy) == (0, 0) || nx < 0 || ny < 0 || nx >= w as isize || ny >= h as isize {
                            continue;
                        }
                        let n = response[ny as usize * w + nx as usize];
                        let earlier = (dy, dx) < (0, 0);
                        if n > v || (earlier && n == v) {
                            return None;
                        }
                    }
                }
                Some(Corner { x: x as f64, y: y as f64, score: v })
            })
        })
        .collect();
    corners.sort_by(|a, b| b.score.total_cmp(&a.score).then(a.y.total_cmp(&b.y)).then(a.x.total_cmp(&b.x)));
    Ok(corners)
}
