use rayon::prelude::*;

use super::IntegrationWindow;
use crate::aer::{FrameStack, Resolution};
use crate::{Error, Result};

const FILE_MAGIC: &[u8; 4] = b"FEA1";

/// Per-pixel feature vectors of uniform length, stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureImage {
    resolution: Resolution,
    dim: usize,
    data: Vec<f32>,
}

impl FeatureImage {
    pub fn new(resolution: Resolution, dim: usize, data: Vec<f32>) -> Result<Self> {
        if dim == 0 || data.len() != resolution.pixel_count() * dim {
            return Err(Error::Argument(format!(
                "{} values do not form {resolution} vectors of length {dim}",
                data.len()
            )));
        }
        Ok(FeatureImage { resolution, dim, data })
    }

    pub fn resolution(&self) -> Resolution {
        self.resolution
    }

    /// Vector length, `N + 1` including the bias component.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn vector(&self, pixel: usize) -> &[f32] {
        &self.data[pixel * self.dim..(pixel + 1) * self.dim]
    }

    pub fn vector_at(&self, x: u16, y: u16) -> &[f32] {
        self.vector(self.resolution.index(x, y))
    }

    /// `FEA1`, little-endian `u16` width, height and vector length, then
    /// row-major `f32` vectors.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(10 + self.data.len() * 4);
        out.extend_from_slice(FILE_MAGIC);
        out.extend_from_slice(&self.resolution.width.to_le_bytes());
        out.extend_from_slice(&self.resolution.height.to_le_bytes());
        out.extend_from_slice(&(self.dim as u16).to_le_bytes());
        for v in &self.data {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 10 {
            return Err(Error::parse_byte(bytes.len(), "truncated feature header"));
        }
        if &bytes[..4] != FILE_MAGIC {
            return Err(Error::parse_byte(0, "bad magic, expected 'FEA1'"));
        }
        let w = u16::from_le_bytes([bytes[4], bytes[5]]);
        let h = u16::from_le_bytes([bytes[6], bytes[7]]);
        let dim = u16::from_le_bytes([bytes[8], bytes[9]]) as usize;
        let res = Resolution::new(w, h);
        let body = &bytes[10..];
        let want = res.pixel_count() * dim * 4;
        if body.len() != want {
            return Err(Error::parse_byte(10 + body.len().min(want), format!("expected {want} bytes of vectors, got {}", body.len())));
        }
        let data = body
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
            .collect();
        FeatureImage::new(res, dim, data)
    }
}

/// Build the length-`N + 1` feature vector of every pixel.
///
/// Component `i` is the pixel's signed event sum averaged over the slices of
/// each window with transition index `i`, then averaged across those windows
/// (cycles). The final component is the constant bias `1`. Windows extending
/// past the stack are clipped.
pub fn extract_features(
    stack: &FrameStack,
    windows: &[IntegrationWindow],
    n: usize,
) -> Result<FeatureImage> {
    if n == 0 {
        return Err(Error::Argument("feature extraction needs N >= 1".into()));
    }
    let mut by_index: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for w in windows {
        if w.transition_index >= n {
            return Err(Error::Argument(format!(
                "window transition index {} out of range for N = {n}",
                w.transition_index
            )));
        }
        let end = w.end_slice.min(stack.len());
        if w.start_slice >= end {
            return Err(Error::Argument(format!(
                "window [{}, {}) is empty within a {}-slice stack",
                w.start_slice,
                w.end_slice,
                stack.len()
            )));
        }
        by_index[w.transition_index].push((w.start_slice, end));
    }
    if let Some(missing) = by_index.iter().position(Vec::is_empty) {
        return Err(Error::Argument(format!("no window for transition index {missing}")));
    }

    let pixels = stack.resolution().pixel_count();
    let components: Vec<Vec<f64>> = by_index
        .par_iter()
        .map(|ranges| {
            let mut acc = vec![0.0f64; pixels];
            for &(start, end) in ranges {
                let mut sums = vec![0i64; pixels];
                for k in start..end {
                    for e in stack.slice(k) {
                        sums[e.pixel as usize] += e.signed();
                    }
                }
                let len = (end - start) as f64;
                for (a, s) in acc.iter_mut().zip(&sums) {
                    *a += *s as f64 / len;
                }
            }
            let cycles = ranges.len() as f64;
            acc.iter_mut().for_each(|a| *a /= cycles);
            acc
        })
        .collect();

    let dim = n + 1;
    let mut data = vec![0f32; pixels * dim];
    for (p, vector) in data.chunks_exact_mut(dim).enumerate() {
        for (i, comp) in components.iter().enumerate() {
            vector[i] = comp[p] as f32;
        }
        vector[n] = 1.0;
    }
    FeatureImage::new(stack.resolution(), dim, data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aer::SliceEntry;

    fn win(i: usize, s: usize, e: usize) -> IntegrationWindow {
        IntegrationWindow { transition_index: i, start_slice: s, end_slice: e, tau: 0.0 }
    }

    fn stack_from_signed(res: Resolution, planes: &[Vec<i32>]) -> FrameStack {
        let slices = planes
            .iter()
            .map(|plane| {
                plane
                    .iter()
                    .enumerate()
                    .filter(|(_, &v)| v != 0)
                    .map(|(i, &v)| SliceEntry {
                        pixel: i as u32,
                        pos: v.max(0) as u32,
                        neg: (-v).max(0) as u32,
                    })
                    .collect()
            })
            .collect();
        FrameStack::from_slices(600.0, res, slices).unwrap()
    }

    #[test]
    fn zero_stack_gives_bias_only() {
        let res = Resolution::new(2, 2);
        let st = stack_from_signed(res, &vec![vec![0; 4]; 6]);
        let f = extract_features(&st, &[win(0, 0, 3), win(1, 3, 6)], 2).unwrap();
        for p in 0..4 {
            assert_eq!(f.vector(p), &[0.0, 0.0, 1.0]);
        }
    }

    #[test]
    fn window_mean_over_slices() {
        let res = Resolution::new(1, 1);
        let st = stack_from_signed(res, &[vec![2], vec![1], vec![1], vec![0]]);
        let f = extract_features(&st, &[win(0, 0, 4)], 1).unwrap();
        assert_eq!(f.vector(0), &[1.0, 1.0]);
    }

    #[test]
    fn cross_cycle_average() {
        let res = Resolution::new(1, 1);
        let st = stack_from_signed(res, &[vec![1], vec![1], vec![3], vec![3]]);
        let f = extract_features(&st, &[win(0, 0, 2), win(0, 2, 4)], 1).unwrap();
        assert_eq!(f.vector(0)[0], 2.0);
    }

    #[test]
    fn missing_transition_is_an_error() {
        let res = Resolution::new(1, 1);
        let st = stack_from_signed(res, &[vec![1], vec![1]]);
        assert!(matches!(extract_features(&st, &[win(0, 0, 2)], 2), Err(Error::Argument(_))));
    }

    #[test]
    fn features_are_linear_in_signed_sums() {
        let res = Resolution::new(3, 1);
        let planes: Vec<Vec<i32>> = (0..8).map(|k| vec![k - 3, 2 * k % 5, -(k % 3)]).collect();
        let scaled: Vec<Vec<i32>> = planes.iter().map(|p| p.iter().map(|v| v * 4).collect()).collect();
        let ws = [win(0, 0, 3), win(1, 3, 8)];
        let a = extract_features(&stack_from_signed(res, &planes), &ws, 2).unwrap();
        let b = extract_features(&stack_from_signed(res, &scaled), &ws, 2).unwrap();
        for p in 0..3 {
            let (va, vb) = (a.vector(p), b.vector(p));
            assert_eq!(vb[0], 4.0 * va[0]);
            assert_eq!(vb[1], 4.0 * va[1]);
            assert_eq!(vb[2], 1.0);
        }
    }

    #[test]
    fn file_round_trip() {
        let f = FeatureImage::new(Resolution::new(2, 1), 3, vec![0.5, -1.25, 1.0, 3.0, 0.0, 1.0]).unwrap();
        assert_eq!(FeatureImage::from_bytes(&f.to_bytes()).unwrap(), f);
        assert!(FeatureImage::from_bytes(&f.to_bytes()[..12]).is_err());
    }
}
