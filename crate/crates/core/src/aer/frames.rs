//! Pseudo-frames: events summed per pixel over uniform time slices.

use rayon::prelude::*;

use super::{EventStream, Polarity, Resolution, US_PER_S};
use crate::{Error, Result};

const FILE_MAGIC: &[u8; 4] = b"FRS1";
const FILE_HEADER_LEN: usize = 20;

/// Event counts of one pixel inside one slice.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SliceEntry {
    /// Row-major pixel index.
    pub pixel: u32,
    pub pos: u32,
    pub neg: u32,
}

impl SliceEntry {
    #[inline]
    pub fn signed(&self) -> i64 {
        self.pos as i64 - self.neg as i64
    }

    #[inline]
    pub fn total(&self) -> u64 {
        self.pos as u64 + self.neg as u64
    }
}

/// Time-quantized event sums.
///
/// Slice `k` covers `[k / fps, (k + 1) / fps)` seconds measured from `t = 0`.
/// Each slice stores only pixels that saw at least one event, sorted by pixel
/// index; all other pixels are zero. The signed sum of a pixel is always
/// `pos - neg`.
#[derive(Clone, Debug, PartialEq)]
pub struct FrameStack {
    fps: f64,
    resolution: Resolution,
    slices: Vec<Vec<SliceEntry>>,
}

impl FrameStack {
    /// Build from per-slice entry lists. Entries must be strictly increasing
    /// in pixel index, inside the resolution and non-empty.
    pub fn from_slices(
        fps: f64,
        resolution: Resolution,
        slices: Vec<Vec<SliceEntry>>,
    ) -> Result<Self> {
        check_fps(fps)?;
        let n = resolution.pixel_count() as u32;
        for (k, slice) in slices.iter().enumerate() {
            let ordered = slice.windows(2).all(|w| w[0].pixel < w[1].pixel);
            let valid = slice.iter().all(|e| e.pixel < n && e.total() > 0);
            if !ordered || !valid {
                return Err(Error::Validation(format!(
                    "slice {k} has unordered, empty or out-of-range entries"
                )));
            }
        }
        Ok(FrameStack {
            fps,
            resolution,
            slices,
        })
    }

    pub fn fps(&self) -> f64 {
        self.fps
    }

    pub fn resolution(&self) -> Resolution {
        self.resolution
    }

    /// Number of slices.
    pub fn len(&self) -> usize {
        self.slices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slices.is_empty()
    }

    pub fn slice(&self, k: usize) -> &[SliceEntry] {
        &self.slices[k]
    }

    pub fn slices(&self) -> &[Vec<SliceEntry>] {
        &self.slices
    }

    pub fn slice_duration_s(&self) -> f64 {
        1.0 / self.fps
    }

    /// Dense row-major plane of signed sums for slice `k`.
    pub fn signed_plane(&self, k: usize) -> Vec<i32> {
        let mut plane = vec![0i32; self.resolution.pixel_count()];
        for e in &self.slices[k] {
            plane[e.pixel as usize] = e.signed() as i32;
        }
        plane
    }

    pub fn pos_plane(&self, k: usize) -> Vec<u32> {
        let mut plane = vec![0u32; self.resolution.pixel_count()];
        for e in &self.slices[k] {
            plane[e.pixel as usize] = e.pos;
        }
        plane
    }

    pub fn neg_plane(&self, k: usize) -> Vec<u32> {
        let mut plane = vec![0u32; self.resolution.pixel_count()];
        for e in &self.slices[k] {
            plane[e.pixel as usize] = e.neg;
        }
        plane
    }

    pub fn total_events(&self) -> u64 {
        self.slices
            .iter()
            .flat_map(|s| s.iter().map(SliceEntry::total))
            .sum()
    }

    /// Merge adjacent slice pairs into a stack at half the frame rate. An odd
    /// trailing slice is merged with an implicit empty slice.
    pub fn coarsen_by_two(&self) -> FrameStack {
        let slices = self
            .slices
            .chunks(2)
            .map(|pair| match pair {
                [a, b] => merge_entries(a, b),
                [a] => a.clone(),
                _ => unreachable!(),
            })
            .collect();
        FrameStack {
            fps: self.fps / 2.0,
            resolution: self.resolution,
            slices,
        }
    }

    /// Serialize as `FRS1`: little-endian `u16` width, `u16` height, `u32`
    /// slice count, `f64` fps, then per slice a row-major `i32` signed plane
    /// followed by `u32` pos and `u32` neg planes.
    pub fn to_bytes(&self) -> Vec<u8> {
        let n = self.resolution.pixel_count();
        let mut out = Vec::with_capacity(FILE_HEADER_LEN + self.len() * n * 12);
        out.extend_from_slice(FILE_MAGIC);
        out.extend_from_slice(&self.resolution.width.to_le_bytes());
        out.extend_from_slice(&self.resolution.height.to_le_bytes());
        out.extend_from_slice(&(self.len() as u32).to_le_bytes());
        out.extend_from_slice(&self.fps.to_le_bytes());
        for k in 0..self.len() {
            for v in self.signed_plane(k) {
                out.extend_from_slice(&v.to_le_bytes());
            }
            for v in self.pos_plane(k) {
                out.extend_from_slice(&v.to_le_bytes());
            }
            for v in self.neg_plane(k) {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<FrameStack> {
        if bytes.len() < FILE_HEADER_LEN {
            return Err(Error::parse_byte(bytes.len(), "truncated frame stack header"));
        }
        if &bytes[..4] != FILE_MAGIC {
            return Err(Error::parse_byte(0, "bad magic, expected 'FRS1'"));
        }
        let width = u16::from_le_bytes([bytes[4], bytes[5]]);
        let height = u16::from_le_bytes([bytes[6], bytes[7]]);
        let count = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
        let fps = f64::from_le_bytes(bytes[12..20].try_into().unwrap());
        let resolution = Resolution::new(width, height);
        let n = resolution.pixel_count();
        let slice_len = n * 12;
        let body = &bytes[FILE_HEADER_LEN..];
        if body.len() != count * slice_len {
            return Err(Error::parse_byte(
                FILE_HEADER_LEN + body.len().min(count * slice_len),
                format!("expected {count} slices of {slice_len} bytes, body holds {}", body.len()),
            ));
        }
        let word = |buf: &[u8], i: usize| -> [u8; 4] { buf[4 * i..4 * i + 4].try_into().unwrap() };
        let mut slices = Vec::with_capacity(count);
        for k in 0..count {
            let base = FILE_HEADER_LEN + k * slice_len;
            let chunk = &body[k * slice_len..(k + 1) * slice_len];
            let (signed, rest) = chunk.split_at(4 * n);
            let (pos, neg) = rest.split_at(4 * n);
            let mut entries = Vec::new();
            for i in 0..n {
                let s = i32::from_le_bytes(word(signed, i));
                let p = u32::from_le_bytes(word(pos, i));
                let m = u32::from_le_bytes(word(neg, i));
                if s as i64 != p as i64 - m as i64 {
                    return Err(Error::parse_byte(
                        base + 4 * i,
                        format!("slice {k} pixel {i}: signed {s} != {p} - {m}"),
                    ));
                }
                if p + m > 0 {
                    entries.push(SliceEntry { pixel: i as u32, pos: p, neg: m });
                }
            }
            slices.push(entries);
        }
        FrameStack::from_slices(fps, resolution, slices)
    }
}

fn check_fps(fps: f64) -> Result<()> {
    if !(fps.is_finite() && fps > 0.0) {
        return Err(Error::Argument(format!("fps must be positive and finite, got {fps}")));
    }
    Ok(())
}

fn merge_entries(a: &[SliceEntry], b: &[SliceEntry]) -> Vec<SliceEntry> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        match (a.get(i), b.get(j)) {
            (Some(x), Some(y)) if x.pixel == y.pixel => {
                out.push(SliceEntry { pixel: x.pixel, pos: x.pos + y.pos, neg: x.neg + y.neg });
                i += 1;
                j += 1;
            }
            (Some(x), Some(y)) if x.pixel < y.pixel => {
                out.push(*x);
                i += 1;
            }
            (Some(_), Some(y)) | (None, Some(y)) => {
                out.push(*y);
                j += 1;
            }
            (Some(x), None) => {
                out.push(*x);
                i += 1;
            }
            (None, None) => unreachable!(),
        }
    }
    out
}

/// Slice index of a timestamp. Computed as `floor(t * fps / 1e6)`; doubling
/// `fps` doubles the intermediate exactly, so binning at `2 * fps` refines
/// binning at `fps`.
#[inline]
pub(crate) fn slice_index(t_us: u64, fps: f64) -> usize {
    ((t_us as f64 * fps) / US_PER_S).floor() as usize
}

/// Bin a stream into pseudo-frames at `fps`.
///
/// Slices run from `t = 0` through the slice containing the last event;
/// slices without events are present and empty. An empty stream yields an
/// empty stack.
pub fn bin_events(stream: &EventStream, fps: f64) -> Result<FrameStack> {
    check_fps(fps)?;
    let resolution = stream.resolution();
    let events = stream.events();
    let Some(last) = stream.last_time() else {
        return FrameStack::from_slices(fps, resolution, Vec::new());
    };
    let count = slice_index(last, fps) + 1;

    // events are time-sorted, so each slice is a contiguous run
    let mut bounds = Vec::with_capacity(count + 1);
    bounds.push(0usize);
    let mut k = 0usize;
    for (i, e) in events.iter().enumerate() {
        let s = slice_index(e.t, fps);
        while k < s {
            bounds.push(i);
            k += 1;
        }
    }
    while bounds.len() < count + 1 {
        bounds.push(events.len());
    }

    let slices = (0..count)
        .into_par_iter()
        .map(|k| {
            let run = &events[bounds[k]..bounds[k + 1]];
            let mut keys: Vec<(u32, Polarity)> = run
                .iter()
                .map(|e| (resolution.index(e.x, e.y) as u32, e.p))
                .collect();
            keys.sort_unstable();
            let mut entries: Vec<SliceEntry> = Vec::new();
            for (pixel, p) in keys {
                match entries.last_mut() {
                    Some(last) if last.pixel == pixel => match p {
                        Polarity::On => last.pos += 1,
                        Polarity::Off => last.neg += 1,
                    },
                    _ => entries.push(SliceEntry {
                        pixel,
                        pos: (p == Polarity::On) as u32,
                        neg: (p == Polarity::Off) as u32,
                    }),
                }
            }
            entries
        })
        .collect();

    Ok(FrameStack {
        fps,
        resolution,
        slices,
    })
}

/// Total event count (both polarities, all pixels) of every slice.
pub fn event_count_curve(stack: &FrameStack) -> Vec<u64> {
    stack
        .slices
        .iter()
        .map(|s| s.iter().map(SliceEntry::total).sum())
        .collect()
}
