use std::fmt::Write as _;

use image::RgbImage;

use crate::{Error, Result};

/// A labelled rectangle of uniform color in a test chart.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Patch {
    pub label: String,
    pub x: u32,
    pub y: u32,
    pub w: u32,
    pub h: u32,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PatchSpec {
    pub patches: Vec<Patch>,
}

impl PatchSpec {
    /// Lines `label,x,y,w,h`; blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut patches = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let f: Vec<&str> = line.split(',').map(str::trim).collect();
            if f.len() != 5 {
                return Err(Error::parse_line(i + 1, format!("expected label,x,y,w,h, got '{line}'")));
            }
            let num = |s: &str| s.parse::<u32>().map_err(|_| Error::parse_line(i + 1, format!("bad number '{s}'")));
            let p = Patch { label: f[0].to_string(), x: num(f[1])?, y: num(f[2])?, w: num(f[3])?, h: num(f[4])? };
            if p.w == 0 || p.h == 0 {
                return Err(Error::parse_line(i + 1, "empty patch"));
            }
            patches.push(p);
        }
        Ok(PatchSpec { patches })
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for p in &self.patches {
            let _ = writeln!(out, "{},{},{},{},{}", p.label, p.x, p.y, p.w, p.h);
        }
        out
    }

    /// Regular grid of `cols x rows` patches of `size x size` pixels.
    pub fn grid(labels: &[&str], cols: u32, size: u32) -> Self {
        let patches = labels
            .iter()
            .enumerate()
            .map(|(i, l)| Patch {
                label: (*l).to_string(),
                x: (i as u32 % cols) * size,
                y: (i as u32 / cols) * size,
                w: size,
                h: size,
            })
            .collect();
        PatchSpec { patches }
    }

    pub fn check_bounds(&self, width: u32, height: u32) -> Result<()> {
        for p in &self.patches {
            if p.w == 0 || p.h == 0 || p.x as u64 + p.w as u64 > width as u64 || p.y as u64 + p.h as u64 > height as u64 {
                return Err(Error::Argument(format!(
                    "patch '{}' ({},{},{},{}) is outside the {width}x{height} image",
                    p.label, p.x, p.y, p.w, p.h
                )));
            }
        }
        Ok(())
    }
}

/// The four interior sample points, offset a quarter of the patch size from
/// each edge.
pub fn sample_points(p: &Patch) -> [(u32, u32); 4] {
    let (x0, x1) = (p.x + p.w / 4, p.x + 3 * p.w / 4);
    let (y0, y1) = (p.y + p.h / 4, p.y + 3 * p.h / 4);
    [(x0, y0), (x1, y0), (x0, y1), (x1, y1)]
}

/// Mean of the four sample points.
pub fn perceived_color(img: &RgbImage, p: &Patch) -> [f64; 3] {
    let mut acc = [0.0; 3];
    for (x, y) in sample_points(p) {
        let px = img.get_pixel(x, y).0;
        for c in 0..3 {
            acc[c] += px[c] as f64 / 4.0;
        }
    }
    acc
}

#[derive(Clone, Debug, PartialEq)]
pub struct PatchRow {
    pub label: String,
    pub reference: [f64; 3],
    pub test: [f64; 3],
    /// Squared perceived-color difference, averaged over channels.
    pub mse: f64,
}

/// Per-patch comparison of perceived colors.
pub fn patch_mse(reference: &RgbImage, test: &RgbImage, spec: &PatchSpec) -> Result<Vec<PatchRow>> {
    super::check_pair(reference, test)?;
    spec.check_bounds(reference.width(), reference.height())?;
    Ok(spec
        .patches
        .iter()
        .map(|p| {
            let (r, t) = (perceived_color(reference, p), perceived_color(test, p));
            let mse = (0..3).map(|c| (r[c] - t[c]).powi(2)).sum::<f64>() / 3.0;
            PatchRow { label: p.label.clone(), reference: r, test: t, mse }
        })
        .collect())
}

/// Root of the mean patch MSE.
pub fn patch_rmse(rows: &[PatchRow]) -> f64 {
    if rows.is_empty() {
        return 0.0;
    }
    (rows.iter().map(|r| r.mse).sum::<f64>() / rows.len() as f64).sqrt()
}

impl PatchRow {
    pub fn table(rows: &[PatchRow]) -> String {
        let fmt = |c: &[f64; 3]| format!("({:.0},{:.0},{:.0})", c[0], c[1], c[2]);
        let mut out = format!("{:<16}{:>18}{:>18}{:>12}\n", "patch", "reference", "perceived", "mse");
        for r in rows {
            let _ = writeln!(out, "{:<16}{:>18}{:>18}{:>12.1}", r.label, fmt(&r.reference), fmt(&r.test), r.mse);
        }
        let _ = writeln!(out, "{:<16}{:>48.3}", "rmse", patch_rmse(rows));
        out
    }

    pub fn csv(rows: &[PatchRow]) -> String {
        let mut out = String::from("label,ref_r,ref_g,ref_b,test_r,test_g,test_b,mse\n");
        for r in rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                r.label, r.reference[0], r.reference[1], r.reference[2], r.test[0], r.test[1], r.test[2], r.mse
            );
        }
        out
    }
}
