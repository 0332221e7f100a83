use image::{ImageBuffer, Pixel};
use rayon::prelude::*;

use super::Homography;
use crate::Result;

/// Resample `image` into a `width x height` target through `h`, which maps
/// source pixel coordinates to target coordinates.
///
/// Each target pixel centre is mapped back through `h⁻¹` and sampled
/// bilinearly. Samples outside the source are zero.
pub fn warp_image<P>(
    image: &ImageBuffer<P, Vec<u8>>,
    h: &Homography,
    width: u32,
    height: u32,
) -> Result<ImageBuffer<P, Vec<u8>>>
where
    P: Pixel<Subpixel = u8> + Send + Sync,
{
    let inv = h.inverse()?;
    let ch = P::CHANNEL_COUNT as usize;
    let (sw, sh) = (image.width() as usize, image.height() as usize);
    let src = image.as_raw();
    let mut buf = vec![0u8; width as usize * height as usize * ch];
    if width == 0 || sw == 0 || sh == 0 {
        return Ok(ImageBuffer::from_raw(width, height, buf).expect("sized buffer"));
    }
    buf.par_chunks_mut(width as usize * ch).enumerate().for_each(|(y, row)| {
        for x in 0..width as usize {
            let Some((sx, sy)) = inv.apply(x as f64, y as f64) else { continue };
            const EDGE: f64 = 1e-9;
            if !(sx >= -EDGE && sy >= -EDGE && sx <= (sw - 1) as f64 + EDGE && sy <= (sh - 1) as f64 + EDGE) {
                continue;
            }
            let (sx, sy) = (sx.clamp(0.0, (sw - 1) as f64), sy.clamp(0.0, (sh - 1) as f64));
            let (x0, y0) = (sx.floor() as usize, sy.floor() as usize);
            let (x1, y1) = ((x0 + 1).min(sw - 1), (y0 + 1).min(sh - 1));
            let (fx, fy) = (sx - x0 as f64, sy - y0 as f64);
            for c in 0..ch {
                let at = |xx: usize, yy: usize| src[(yy * sw + xx) * ch + c] as f64;
                let v = (1.0 - fy) * ((1.0 - fx) * at(x0, y0) + fx * at(x1, y0))
                    + fy * ((1.0 - fx) * at(x0, y1) + fx * at(x1, y1));
                row[x * ch + c] = v.round().clamp(0.0, 255.0) as u8;
            }
        }
    });
    Ok(ImageBuffer::from_raw(width, height, buf).expect("sized buffer"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use image::RgbImage;
    use nalgebra::Matrix3;

    fn pattern(w: u32, h: u32) -> RgbImage {
        RgbImage::from_fn(w, h, |x, y| {
            let (xf, yf) = (x as f64, y as f64);
            image::Rgb([
                (127.5 + 100.0 * (xf / 9.0).sin() * (yf / 11.0).cos()) as u8,
                (2 * x + y) as u8,
                (127.5 + 90.0 * ((xf + yf) / 13.0).sin()) as u8,
            ])
        })
    }

    #[test]
    fn identity_is_exact() {
        let img = pattern(30, 20);
        let out = warp_image(&img, &Homography::identity(), 30, 20).unwrap();
        assert_eq!(out, img);
    }

    #[test]
    fn integer_translation_shifts_with_zero_fill() {
        let img = pattern(30, 20);
        let h = Homography::new(Matrix3::new(1.0, 0.0, 3.0, 0.0, 1.0, -2.0, 0.0, 0.0, 1.0)).unwrap();
        let out = warp_image(&img, &h, 30, 20).unwrap();
        for y in 0..20u32 {
            for x in 0..30u32 {
                let (sx, sy) = (x as i64 - 3, y as i64 + 2);
                let want = if sx >= 0 && sy < 20 { img.get_pixel(sx as u32, sy as u32).0 } else { [0, 0, 0] };
                assert_eq!(out.get_pixel(x, y).0, want, "({x},{y})");
            }
        }
    }

    #[test]
    fn round_trip_is_close_away_from_borders() {
        let img = pattern(80, 60);
        let h = Homography::new(Matrix3::new(0.98, 0.05, 2.0, -0.04, 1.01, 1.5, 1e-4, -2e-4, 1.0)).unwrap();
        let there = warp_image(&img, &h, 80, 60).unwrap();
        let back = warp_image(&there, &h.inverse().unwrap(), 80, 60).unwrap();
        let (mut sum, mut n) = (0.0, 0);
        for y in 8..52 {
            for x in 8..72 {
                for c in 0..3 {
                    sum += (back.get_pixel(x, y).0[c] as f64 - img.get_pixel(x, y).0[c] as f64).abs();
                    n += 1;
                }
            }
        }
        assert!(sum / (n as f64) < 2.0, "mae {}", sum / n as f64);
    }

    #[test]
    fn singular_homography_is_rejected() {
        assert!(Homography::new(Matrix3::new(1.0, 2.0, 0.0, 2.0, 4.0, 0.0, 0.0, 0.0, 1.0)).is_err());
    }

    #[test]
    fn works_on_gray_images() {
        let img = image::GrayImage::from_fn(10, 10, |x, y| image::Luma([(x * 10 + y) as u8]));
        assert_eq!(warp_image(&img, &Homography::identity(), 10, 10).unwrap(), img);
    }
}
