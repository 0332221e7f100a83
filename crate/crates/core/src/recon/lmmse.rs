use std::fmt::Write as _;

use image::RgbImage;
use nalgebra::DMatrix;
use rayon::prelude::*;

use super::{pseudo_inverse, FeatureImage, DEFAULT_PINV_TOLERANCE};
use crate::{Error, Result};

/// Linear map from `(N + 1)`-dimensional feature vectors to RGB in `[0, 255]`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearModel {
    w: DMatrix<f64>,
}

impl LinearModel {
    pub fn new(w: DMatrix<f64>) -> Result<Self> {
        if w.ncols() != 3 || w.nrows() == 0 {
            return Err(Error::Argument(format!(
                "model must have shape (N+1) x 3, got {} x {}",
                w.nrows(),
                w.ncols()
            )));
        }
        if w.iter().any(|v| !v.is_finite()) {
            return Err(Error::Argument("model has non-finite entries".into()));
        }
        Ok(LinearModel { w })
    }

    pub fn weights(&self) -> &DMatrix<f64> {
        &self.w
    }

    /// Feature-vector length the model expects.
    pub fn dim(&self) -> usize {
        self.w.nrows()
    }

    /// Unclamped RGB prediction for one feature vector.
    pub fn predict(&self, x: &[f32]) -> [f64; 3] {
        let mut y = [0.0; 3];
        for (c, yc) in y.iter_mut().enumerate() {
            *yc = x
                .iter()
                .enumerate()
                .map(|(i, &xi)| xi as f64 * self.w[(i, c)])
                .sum();
        }
        y
    }

    /// Text form: `lmmse v1 <rows> <cols>` then one line of space-separated
    /// entries per row. Entries use the shortest exact decimal form.
    pub fn to_text(&self) -> String {
        let mut out = format!("lmmse v1 {} {}\n", self.w.nrows(), self.w.ncols());
        for r in 0..self.w.nrows() {
            let row: Vec<String> = (0..self.w.ncols()).map(|c| format!("{:?}", self.w[(r, c)])).collect();
            let _ = writeln!(out, "{}", row.join(" "));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or_else(|| Error::parse_line(1, "empty model file"))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        let (rows, cols) = match fields.as_slice() {
            ["lmmse", "v1", r, c] => (
                r.parse::<usize>().map_err(|_| Error::parse_line(1, "bad row count"))?,
                c.parse::<usize>().map_err(|_| Error::parse_line(1, "bad column count"))?,
            ),
            _ => return Err(Error::parse_line(1, "expected 'lmmse v1 <rows> <cols>'")),
        };
        let mut values = Vec::with_capacity(rows * cols);
        for (i, line) in lines {
            let row: Vec<f64> = line
                .split_whitespace()
                .map(|v| v.parse::<f64>().map_err(|_| Error::parse_line(i + 1, format!("bad entry '{v}'"))))
                .collect::<Result<_>>()?;
            if row.len() != cols {
                return Err(Error::parse_line(i + 1, format!("expected {cols} entries, got {}", row.len())));
            }
            values.extend(row);
        }
        if values.len() != rows * cols {
            return Err(Error::parse_line(rows + 1, format!("expected {rows} rows")));
        }
        LinearModel::new(DMatrix::from_row_slice(rows, cols, &values))
    }
}

/// Least-squares fit `W = pinv(X) Y` minimizing `||X W - Y||_F`.
///
/// `features` is `M x (N + 1)` with the bias column included; `labels` is
/// `M x 3` RGB in `[0, 255]`.
pub fn fit_lmmse(features: &DMatrix<f64>, labels: &DMatrix<f64>) -> Result<LinearModel> {
    if features.nrows() != labels.nrows() {
        return Err(Error::Argument(format!(
            "{} feature rows but {} label rows",
            features.nrows(),
            labels.nrows()
        )));
    }
    if labels.ncols() != 3 {
        return Err(Error::Argument(format!("labels must have 3 columns, got {}", labels.ncols())));
    }
    if features.nrows() < features.ncols() {
        log::warn!(
            "fitting {} unknowns per channel from only {} samples",
            features.ncols(),
            features.nrows()
        );
    }
    let pinv = pseudo_inverse(features, DEFAULT_PINV_TOLERANCE)?;
    LinearModel::new(pinv * labels)
}

/// Fit on the pixels selected by `mask` (all pixels when `None`).
pub fn fit_from_images(
    features: &FeatureImage,
    labels: &RgbImage,
    mask: Option<&[bool]>,
) -> Result<LinearModel> {
    let res = features.resolution();
    if labels.dimensions() != (res.width as u32, res.height as u32) {
        return Err(Error::Argument(format!(
            "labels are {}x{} but features are {res}",
            labels.width(),
            labels.height()
        )));
    }
    let n = res.pixel_count();
    if let Some(m) = mask {
        if m.len() != n {
            return Err(Error::Argument("mask length does not match the image".into()));
        }
    }
    let selected: Vec<usize> = (0..n).filter(|&p| mask.is_none_or(|m| m[p])).collect();
    let dim = features.dim();
    let x = DMatrix::from_fn(selected.len(), dim, |r, c| features.vector(selected[r])[c] as f64);
    let raw = labels.as_raw();
    let y = DMatrix::from_fn(selected.len(), 3, |r, c| raw[selected[r] * 3 + c] as f64);
    fit_lmmse(&x, &y)
}

/// Map every pixel's feature vector to 8-bit RGB: `y = x^T W`, clamped to
/// `[0, 255]` and rounded half away from zero.
pub fn apply(model: &LinearModel, features: &FeatureImage) -> Result<RgbImage> {
    if features.dim() != model.dim() {
        return Err(Error::Argument(format!(
            "features have length {} but the model expects {}",
            features.dim(),
            model.dim()
        )));
    }
    let res = features.resolution();
    let mut buf = vec![0u8; res.pixel_count() * 3];
    buf.par_chunks_mut(3).enumerate().for_each(|(p, px)| {
        let y = model.predict(features.vector(p));
        for c in 0..3 {
            px[c] = to_u8(y[c]);
        }
    });
    Ok(RgbImage::from_raw(res.width as u32, res.height as u32, buf).expect("buffer sized to image"))
}

#[inline]
pub(crate) fn to_u8(v: f64) -> u8 {
    v.clamp(0.0, 255.0).round() as u8
}
