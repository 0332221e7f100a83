use std::fmt::Write as _;
use std::path::Path;

use image::RgbImage;
use sha2::{Digest, Sha256};

use crate::aer::FrameStack;
use crate::recon::IntegrationWindow;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Split {
    Train,
    Validation,
}

impl Split {
    pub fn name(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Validation => "val",
        }
    }
}

/// 80/20 assignment from the SHA-256 of the sample id, stable across runs
/// and independent of the other samples.
pub fn split_for(id: &str) -> Split {
    let digest = Sha256::digest(id.as_bytes());
    let v = u64::from_be_bytes(digest[..8].try_into().expect("8 bytes"));
    if v % 100 < 80 {
        Split::Train
    } else {
        Split::Validation
    }
}

/// One recording with its aligned ground truth.
#[derive(Clone, Copy, Debug)]
pub struct DatasetSample<'a> {
    pub id: &'a str,
    pub stack: &'a FrameStack,
    pub windows: &'a [IntegrationWindow],
    pub label: &'a RgbImage,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExportedSample {
    pub id: String,
    pub split: Split,
    /// Zero frames appended because the recording ended too early.
    pub padded_frames: usize,
    /// Largest absolute signed count, used to normalize the tensor.
    pub scale: f32,
}

fn check_id(id: &str) -> Result<()> {
    if id.is_empty() || id.starts_with('.') || !id.chars().all(|c| c.is_ascii_alphanumeric() || "-_.".contains(c)) {
        return Err(Error::Argument(format!("sample id '{id}' must be non-empty [A-Za-z0-9._-]")));
    }
    Ok(())
}

/// First-cycle window start of every transition index.
fn peak_slices(windows: &[IntegrationWindow], n: usize) -> Result<Vec<usize>> {
    let mut starts = vec![None; n];
    for w in windows {
        if w.transition_index < n && starts[w.transition_index].is_none() {
            starts[w.transition_index] = Some(w.start_slice);
        }
    }
    let found = starts.iter().filter(|s| s.is_some()).count();
    if found < n {
        return Err(Error::Detection { found, expected: n });
    }
    Ok(starts.into_iter().map(Option::unwrap).collect())
}

/// Signed frames `[N * frames, H, W]`, starting at each transition's peak
/// slice, plus the number of zero-padded frames.
fn input_tensor(stack: &FrameStack, starts: &[usize], frames: usize) -> (Vec<f32>, usize, f32) {
    let px = stack.resolution().pixel_count();
    let mut data = vec![0f32; starts.len() * frames * px];
    let mut padded = 0;
    for (i, &start) in starts.iter().enumerate() {
        for k in 0..frames {
            let slice = start + k;
            if slice >= stack.len() {
                padded += 1;
                continue;
            }
            let dst = &mut data[(i * frames + k) * px..][..px];
            for e in stack.slice(slice) {
                dst[e.pixel as usize] = e.signed() as f32;
            }
        }
    }
    let scale = data.iter().fold(0f32, |m, v| m.max(v.abs()));
    if scale > 0.0 {
        data.iter_mut().for_each(|v| *v /= scale);
    }
    (data, padded, scale)
}

/// Write a training set:
///
/// ```text
/// <out>/samples/<id>/input.f32   N*frames x H x W little-endian f32
/// <out>/samples/<id>/input.meta  shape and provenance of the tensor
/// <out>/samples/<id>/label.png   RGB ground truth in sensor coordinates
/// <out>/manifest.txt             one "<id> <split> <padded frames>" line per sample
/// ```
///
/// Tensor values are signed event counts divided by the sample's largest
/// absolute count (`scale` in the sidecar). Every sample is validated before
/// anything is written.
pub fn export_dataset(
    out: &Path,
    samples: &[DatasetSample<'_>],
    n: usize,
    frames_per_transition: usize,
) -> Result<Vec<ExportedSample>> {
    if frames_per_transition == 0 || n == 0 {
        return Err(Error::Argument("N and frames per transition must be positive".into()));
    }
    let mut seen = std::collections::HashSet::new();
    let mut plans = Vec::with_capacity(samples.len());
    for s in samples {
        check_id(s.id)?;
        if !seen.insert(s.id) {
            return Err(Error::Argument(format!("duplicate sample id '{}'", s.id)));
        }
        let res = s.stack.resolution();
        if s.label.dimensions() != (res.width as u32, res.height as u32) {
            return Err(Error::Argument(format!(
                "label for '{}' is {}x{} but the recording is {res}",
                s.id,
                s.label.width(),
                s.label.height()
            )));
        }
        plans.push(peak_slices(s.windows, n)?);
    }

    let mut exported = Vec::with_capacity(samples.len());
    let mut manifest = String::from("# id split padded_frames\n");
    for (s, starts) in samples.iter().zip(&plans) {
        let dir = out.join("samples").join(s.id);
        std::fs::create_dir_all(&dir)?;
        let (data, padded, scale) = input_tensor(s.stack, starts, frames_per_transition);
        let mut bytes = Vec::with_capacity(data.len() * 4);
        for v in &data {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
        std::fs::write(dir.join("input.f32"), bytes)?;
        let res = s.stack.resolution();
        let mut meta = String::new();
        let _ = writeln!(meta, "shape {} {} {}", n * frames_per_transition, res.height, res.width);
        let _ = writeln!(meta, "dtype f32le");
        let _ = writeln!(meta, "layout frame,row,col");
        let _ = writeln!(meta, "transitions {n}");
        let _ = writeln!(meta, "frames_per_transition {frames_per_transition}");
        let _ = writeln!(meta, "fps {:?}", s.stack.fps());
        let _ = writeln!(meta, "scale {scale:?}");
        let _ = writeln!(meta, "padded_frames {padded}");
        let starts_text: Vec<String> = starts.iter().map(|v| v.to_string()).collect();
        let _ = writeln!(meta, "start_slices {}", starts_text.join(" "));
        std::fs::write(dir.join("input.meta"), meta)?;
        s.label.save(dir.join("label.png"))?;
        if padded > 0 {
            log::warn!("sample '{}': {padded} frames zero-padded", s.id);
        }
        let split = split_for(s.id);
        let _ = writeln!(manifest, "{} {} {padded}", s.id, split.name());
        exported.push(ExportedSample { id: s.id.to_string(), split, padded_frames: padded, scale });
    }
    std::fs::create_dir_all(out)?;
    std::fs::write(out.join("manifest.txt"), manifest)?;
    Ok(exported)
}
