use std::fmt::Write as _;

use nalgebra::{DMatrix, Matrix3, Vector3};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::{Error, Result};

/// A point pair: `src` in RGB-camera pixels, `dst` in sensor pixels.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Correspondence {
    pub src: (f64, f64),
    pub dst: (f64, f64),
}

impl Correspondence {
    pub fn new(sx: f64, sy: f64, dx: f64, dy: f64) -> Self {
        Correspondence { src: (sx, sy), dst: (dx, dy) }
    }

    fn is_finite(&self) -> bool {
        [self.src.0, self.src.1, self.dst.0, self.dst.1].iter().all(|v| v.is_finite())
    }
}

/// Invertible projective map, scaled so `H[2][2] = 1` whenever it is non-zero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Homography {
    h: Matrix3<f64>,
}

impl Homography {
    pub fn new(h: Matrix3<f64>) -> Result<Self> {
        if h.iter().any(|v| !v.is_finite()) {
            return Err(Error::Argument("homography has non-finite entries".into()));
        }
        let scale = h.norm();
        if scale == 0.0 || (h.determinant() / scale.powi(3)).abs() < 1e-14 {
            return Err(Error::Argument("homography is singular".into()));
        }
        let h = if h[(2, 2)].abs() > 1e-12 * scale { h / h[(2, 2)] } else { h / scale };
        Ok(Homography { h })
    }

    pub fn identity() -> Self {
        Homography { h: Matrix3::identity() }
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.h
    }

    /// Map a point; `None` when it lands on the line at infinity.
    pub fn apply(&self, x: f64, y: f64) -> Option<(f64, f64)> {
        let p = self.h * Vector3::new(x, y, 1.0);
        if p.z.abs() < 1e-15 {
            return None;
        }
        Some((p.x / p.z, p.y / p.z))
    }

    pub fn inverse(&self) -> Result<Homography> {
        let inv = self.h.try_inverse().ok_or_else(|| Error::Argument("homography is singular".into()))?;
        Homography::new(inv)
    }

    pub fn reprojection_error(&self, c: &Correspondence) -> f64 {
        match self.apply(c.src.0, c.src.1) {
            Some((x, y)) => (x - c.dst.0).hypot(y - c.dst.1),
            None => f64::INFINITY,
        }
    }

    /// Nine whitespace-separated values, row-major, three per line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for r in 0..3 {
            let _ = writeln!(out, "{:?} {:?} {:?}", self.h[(r, 0)], self.h[(r, 1)], self.h[(r, 2)]);
        }
        out
    }

    /// Accepts any whitespace or comma separation; `#` starts a comment.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut values = Vec::with_capacity(9);
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("");
            for tok in line.split(|c: char| c.is_whitespace() || c == ',').filter(|t| !t.is_empty()) {
                let v = tok
                    .parse::<f64>()
                    .map_err(|_| Error::parse_line(i + 1, format!("bad homography entry '{tok}'")))?;
                values.push(v);
            }
        }
        if values.len() != 9 {
            return Err(Error::parse_line(text.lines().count().max(1), format!("expected 9 values, got {}", values.len())));
        }
        Homography::new(Matrix3::from_row_slice(&values))
    }
}

/// Similarity moving the centroid to the origin with mean distance `sqrt(2)`.
fn normalizing_transform(points: impl Iterator<Item = (f64, f64)> + Clone) -> Result<Matrix3<f64>> {
    let n = points.clone().count() as f64;
    let (mx, my) = points.clone().fold((0.0, 0.0), |(a, b), (x, y)| (a + x / n, b + y / n));
    let mean_dist = points.map(|(x, y)| (x - mx).hypot(y - my)).sum::<f64>() / n;
    if !(mean_dist > 0.0) {
        return Err(Error::Estimation("all points coincide".into()));
    }
    let s = std::f64::consts::SQRT_2 / mean_dist;
    Ok(Matrix3::new(s, 0.0, -s * mx, 0.0, s, -s * my, 0.0, 0.0, 1.0))
}

fn transform(t: &Matrix3<f64>, (x, y): (f64, f64)) -> (f64, f64) {
    let p = t * Vector3::new(x, y, 1.0);
    (p.x / p.z, p.y / p.z)
}

fn has_collinear_triple(points: &[(f64, f64)]) -> bool {
    let scale = points.iter().flat_map(|&(x, y)| [x.abs(), y.abs()]).fold(1.0f64, f64::max);
    let n = points.len();
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let (a, b, c) = (points[i], points[j], points[k]);
                let cross = (b.0 - a.0) * (c.1 - a.1) - (b.1 - a.1) * (c.0 - a.0);
                if cross.abs() <= 1e-10 * scale * scale {
                    return true;
                }
            }
        }
    }
    false
}

/// Direct linear transform, optionally with isotropic normalization of both
/// point sets. Exact on consistent data.
pub fn estimate_homography_dlt(corr: &[Correspondence], normalize: bool) -> Result<Homography> {
    if corr.len() < 4 {
        return Err(Error::Estimation(format!("need at least 4 correspondences, got {}", corr.len())));
    }
    if let Some(i) = corr.iter().position(|c| !c.is_finite()) {
        return Err(Error::Argument(format!("correspondence {i} has non-finite coordinates")));
    }
    let (ts, td) = if normalize {
        (
            normalizing_transform(corr.iter().map(|c| c.src))?,
            normalizing_transform(corr.iter().map(|c| c.dst))?,
        )
    } else {
        (Matrix3::identity(), Matrix3::identity())
    };
    let src: Vec<(f64, f64)> = corr.iter().map(|c| transform(&ts, c.src)).collect();
    let dst: Vec<(f64, f64)> = corr.iter().map(|c| transform(&td, c.dst)).collect();
    if corr.len() == 4 && (has_collinear_triple(&src) || has_collinear_triple(&dst)) {
        return Err(Error::Estimation("three of the four points are collinear".into()));
    }

    // Padded to at least 9 rows so the SVD yields the full right basis.
    let rows = (2 * corr.len()).max(9);
    let mut a = DMatrix::<f64>::zeros(rows, 9);
    for (i, (&(x, y), &(u, v))) in src.iter().zip(&dst).enumerate() {
        let r = 2 * i;
        a.row_mut(r).copy_from_slice(&[-x, -y, -1.0, 0.0, 0.0, 0.0, u * x, u * y, u]);
        a.row_mut(r + 1).copy_from_slice(&[0.0, 0.0, 0.0, -x, -y, -1.0, v * x, v * y, v]);
    }
    let svd = a.svd(false, true);
    let vt = svd.v_t.ok_or_else(|| Error::Estimation("SVD did not converge".into()))?;
    let s = &svd.singular_values;
    if s[0] == 0.0 || s[7] / s[0] < 1e-12 {
        return Err(Error::Estimation("degenerate point configuration".into()));
    }
    let hn = Matrix3::from_row_slice(vt.row(8).transpose().as_slice());
    let ti = td.try_inverse().expect("similarity is invertible");
    Homography::new(ti * hn * ts).map_err(|_| Error::Estimation("estimated homography is singular".into()))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RansacParams {
    pub iterations: usize,
    /// Inlier threshold on forward reprojection error, in sensor pixels.
    pub tolerance: f64,
    pub seed: u64,
}

impl Default for RansacParams {
    fn default() -> Self {
        RansacParams { iterations: 2000, tolerance: 2.0, seed: 0 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RansacFit {
    pub homography: Homography,
    pub inliers: Vec<bool>,
}

impl RansacFit {
    pub fn inlier_count(&self) -> usize {
        self.inliers.iter().filter(|&&b| b).count()
    }
}

/// Robust fit: best 4-point hypothesis by inlier count, then a normalized
/// DLT refit on its inliers. The inlier mask is that of the refit model.
pub fn estimate_homography_ransac(corr: &[Correspondence], params: &RansacParams) -> Result<RansacFit> {
    if corr.len() < 4 {
        return Err(Error::Estimation(format!("need at least 4 correspondences, got {}", corr.len())));
    }
    if !(params.tolerance > 0.0 && params.tolerance.is_finite()) {
        return Err(Error::Estimation(format!("inlier tolerance must be positive, got {}", params.tolerance)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let samples: Vec<Vec<usize>> = (0..params.iterations)
        .map(|_| rand::seq::index::sample(&mut rng, corr.len(), 4).into_vec())
        .collect();
    let count = |h: &Homography| corr.iter().filter(|c| h.reprojection_error(c) <= params.tolerance).count();
    let best = samples
        .par_iter()
        .enumerate()
        .filter_map(|(i, idx)| {
            let pick: Vec<Correspondence> = idx.iter().map(|&j| corr[j]).collect();
            estimate_homography_dlt(&pick, true).ok().map(|h| (i, count(&h), h))
        })
        .reduce_with(|a, b| if b.1 > a.1 || (b.1 == a.1 && b.0 < a.0) { b } else { a });
    let (_, n_best, h_best) = best.ok_or_else(|| Error::Estimation("every sample was degenerate".into()))?;
    if n_best < 4 {
        return Err(Error::Estimation(format!("best model has only {n_best} inliers")));
    }
    let inliers: Vec<Correspondence> =
        corr.iter().copied().filter(|c| h_best.reprojection_error(c) <= params.tolerance).collect();
    let refit = estimate_homography_dlt(&inliers, true)?;
    let mask: Vec<bool> = corr.iter().map(|c| refit.reprojection_error(c) <= params.tolerance).collect();
    Ok(RansacFit { homography: refit, inliers: mask })
}

/// Lines `sx,sy,dx,dy`; blank lines and `#` comments are skipped.
pub fn parse_correspondences(text: &str) -> Result<Vec<Correspondence>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let v: Vec<f64> = line
            .split(',')
            .map(|t| t.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::parse_line(i + 1, format!("bad correspondence '{line}'")))?;
        if v.len() != 4 {
            return Err(Error::parse_line(i + 1, format!("expected 4 fields, got {}", v.len())));
        }
        let c = Correspondence::new(v[0], v[1], v[2], v[3]);
        if !c.is_finite() {
            return Err(Error::parse_line(i + 1, "non-finite coordinate"));
        }
        out.push(c);
    }
    Ok(out)
}

pub fn write_correspondences(corr: &[Correspondence]) -> String {
    corr.iter()
        .map(|c| format!("{:?},{:?},{:?},{:?}\n", c.src.0, c.src.1, c.dst.0, c.dst.1))
        .collect()
}
