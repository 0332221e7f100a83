use std::fmt;

use image::RgbImage;

use super::PipelineConfig;
use crate::aer::{bin_events, event_count_curve, EventStream, FrameStack, Resolution};
use crate::metrics::{patch_mse, patch_rmse, MetricSummary, PatchRow, PatchSpec};
use crate::recon::{apply, detect_windows, extract_features, forward_sum, fit_from_images, FeatureImage, IntegrationWindow, LinearModel};
use crate::sim::{simulate, SceneReflectance};
use crate::{Error, Result};

/// Intermediate products of one recording.
#[derive(Clone, Debug)]
pub struct Analysis {
    pub stack: FrameStack,
    pub curve: Vec<u64>,
    pub windows: Vec<IntegrationWindow>,
    pub features: FeatureImage,
}

/// Bin, detect windows and extract features.
///
/// Windows are detected on the forward running sum of the count curve over
/// `cfg.detection_span()` slices; `curve` holds the raw counts.
/// A recording without usable peaks is a detection error.
pub fn analyze(stream: &EventStream, cfg: &PipelineConfig) -> Result<Analysis> {
    let n = cfg.transitions;
    let stack = bin_events(stream, cfg.fps)?;
    let curve = event_count_curve(&stack);
    if curve.len() < 3 {
        return Err(Error::Detection { found: 0, expected: n });
    }
    let windows = detect_windows(&forward_sum(&curve, cfg.detection_span()), cfg.fps, n, cfg.prominence())?;
    if windows.is_empty() {
        return Err(Error::Detection { found: 0, expected: n });
    }
    if windows.len() % n != 0 {
        log::warn!("{} windows is not a whole number of {n}-transition cycles", windows.len());
    }
    let features = extract_features(&stack, &windows, n)?;
    Ok(Analysis { stack, curve, windows, features })
}

/// Training mask selecting every other pixel in a checkerboard pattern.
pub fn checkerboard_mask(res: Resolution) -> Vec<bool> {
    res.pixels().map(|(x, y)| (x as usize + y as usize) % 2 == 0).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct Evaluation {
    pub summary: MetricSummary,
    pub patches: Vec<PatchRow>,
}

impl Evaluation {
    pub fn patch_rmse(&self) -> Option<f64> {
        (!self.patches.is_empty()).then(|| patch_rmse(&self.patches))
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("{}\n{}\n", MetricSummary::csv_header(), self.summary.to_csv());
        if !self.patches.is_empty() {
            out.push('\n');
            out.push_str(&PatchRow::csv(&self.patches));
        }
        out
    }
}

impl fmt::Display for Evaluation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.summary)?;
        if !self.patches.is_empty() {
            write!(f, "\n{}", PatchRow::table(&self.patches))?;
        }
        Ok(())
    }
}

pub fn evaluate(reference: &RgbImage, test: &RgbImage, patches: Option<&PatchSpec>) -> Result<Evaluation> {
    let summary = MetricSummary::compute(reference, test)?;
    let patches = match patches {
        Some(spec) => patch_mse(reference, test, spec)?,
        None => Vec::new(),
    };
    Ok(Evaluation { summary, patches })
}

/// Result of simulating a labelled scene and reconstructing it.
#[derive(Clone, Debug)]
pub struct RoundTrip {
    pub stream: EventStream,
    pub analysis: Analysis,
    pub model: LinearModel,
    pub reconstruction: RgbImage,
    pub evaluation: Evaluation,
}

/// Simulate `scene`, fit the linear model on the checkerboard half of the
/// pixels and reconstruct the whole frame.
pub fn reconstruct(scene: &RgbImage, cfg: &PipelineConfig, patches: Option<&PatchSpec>) -> Result<RoundTrip> {
    cfg.validate()?;
    let reflectance = SceneReflectance::from_rgb_image(scene)?;
    let stream = simulate(&reflectance, &cfg.schedule, &cfg.sensor, &cfg.sim_config())?;
    let analysis = analyze(&stream, cfg)?;
    let mask = checkerboard_mask(reflectance.resolution());
    let model = fit_from_images(&analysis.features, scene, Some(&mask))?;
    let reconstruction = apply(&model, &analysis.features)?;
    let evaluation = evaluate(scene, &reconstruction, patches)?;
    Ok(RoundTrip { stream, analysis, model, reconstruction, evaluation })
}

/// Header `windows v1 <fps> <N>`, then `index,start,end` per window.
pub fn windows_to_text(windows: &[IntegrationWindow], fps: f64, n: usize) -> String {
    let mut out = format!("windows v1 {fps:?} {n}\n");
    for w in windows {
        out.push_str(&format!("{},{},{}\n", w.transition_index, w.start_slice, w.end_slice));
    }
    out
}

/// Returns the windows, the frame rate and `N`.
pub fn parse_windows(text: &str) -> Result<(Vec<IntegrationWindow>, f64, usize)> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'));
    let (i, header) = lines.next().ok_or_else(|| Error::parse_line(1, "empty windows file"))?;
    let h: Vec<&str> = header.split_whitespace().collect();
    let (fps, n) = match h.as_slice() {
        ["windows", "v1", fps, n] => (
            fps.parse::<f64>().map_err(|_| Error::parse_line(i + 1, "bad fps"))?,
            n.parse::<usize>().map_err(|_| Error::parse_line(i + 1, "bad transition count"))?,
        ),
        _ => return Err(Error::parse_line(i + 1, "expected 'windows v1 <fps> <N>'")),
    };
    if !(fps > 0.0) || n == 0 {
        return Err(Error::parse_line(i + 1, "fps and N must be positive"));
    }
    let mut windows = Vec::new();
    for (i, line) in lines {
        let f: Vec<usize> = line
            .split(',')
            .map(|t| t.trim().parse::<usize>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::parse_line(i + 1, format!("bad window '{line}'")))?;
        match f.as_slice() {
            &[idx, start, end] if idx < n && start < end => windows.push(IntegrationWindow {
                transition_index: idx,
                start_slice: start,
                end_slice: end,
                tau: (end - start) as f64 / fps,
            }),
            _ => return Err(Error::parse_line(i + 1, format!("invalid window '{line}'"))),
        }
    }
    Ok((windows, fps, n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::{color_target, color_target_patches};

    #[test]
    fn mask_is_half() {
        let m = checkerboard_mask(Resolution::new(5, 4));
        assert_eq!(m.iter().filter(|&&b| b).count(), 10);
        assert!(m[0] && !m[1] && !m[5] && m[6]);
    }

    #[test]
    fn windows_round_trip() {
        let w = vec![
            IntegrationWindow { transition_index: 0, start_slice: 3, end_slice: 9, tau: 0.01 },
            IntegrationWindow { transition_index: 1, start_slice: 12, end_slice: 20, tau: 8.0 / 600.0 },
        ];
        let (back, fps, n) = parse_windows(&windows_to_text(&w, 600.0, 2)).unwrap();
        assert_eq!((fps, n), (600.0, 2));
        assert_eq!(back[1], w[1]);
        assert_eq!(back[0].start_slice, 3);
        assert!(parse_windows("windows v1 600 2\n3,1,2\n").is_err());
    }

    #[test]
    fn empty_recording_is_a_detection_error() {
        let stream = EventStream::empty(Resolution::new(4, 4));
        let err = analyze(&stream, &PipelineConfig::default()).unwrap_err();
        assert!(matches!(err, Error::Detection { found: 0, expected: 9 }));
    }

    #[test]
    fn held_out_pixels_generalize() {
        let mut cfg = PipelineConfig::default();
        cfg.illumination.ambient = 0.2;
        let scene = color_target();
        let rt = reconstruct(&scene, &cfg, Some(&color_target_patches())).unwrap();
        let mask = checkerboard_mask(Resolution::new(96, 64));
        let (mut fit, mut held) = ((0.0, 0), (0.0, 0));
        for (i, (a, b)) in scene.pixels().zip(rt.reconstruction.pixels()).enumerate() {
            let e: f64 = (0..3).map(|c| (a.0[c] as f64 - b.0[c] as f64).powi(2)).sum();
            let slot = if mask[i] { &mut fit } else { &mut held };
            slot.0 += e;
            slot.1 += 3;
        }
        let (fit, held) = ((fit.0 / fit.1 as f64).sqrt(), (held.0 / held.1 as f64).sqrt());
        assert!(held < 1.5 * fit, "held-out {held} vs fitted {fit}");
        assert!(rt.evaluation.patch_rmse().unwrap() < 35.0);
    }
}
