use crate::{Error, Result};

/// The slice range over which the response to one flicker transition is
/// integrated.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegrationWindow {
    /// Transition index within the flicker cycle, `0..N`.
    pub transition_index: usize,
    /// First slice (the event-count peak).
    pub start_slice: usize,
    /// One past the last slice.
    pub end_slice: usize,
    /// Window length in seconds.
    pub tau: f64,
}

impl IntegrationWindow {
    pub fn len(&self) -> usize {
        self.end_slice - self.start_slice
    }

    pub fn is_empty(&self) -> bool {
        self.end_slice <= self.start_slice
    }
}

/// How far above the recording mean a peak must rise.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Prominence {
    /// Fixed number of events above the mean.
    Absolute(f64),
    /// Multiple of the mean.
    MeanMultiple(f64),
}

impl Default for Prominence {
    fn default() -> Self {
        Prominence::MeanMultiple(3.0)
    }
}

impl Prominence {
    fn resolve(self, mean: f64) -> f64 {
        match self {
            Prominence::Absolute(v) => v,
            Prominence::MeanMultiple(m) => m * mean,
        }
    }
}

/// Find integration windows in a per-slice event-count curve.
///
/// A window opens at a local maximum that exceeds the global mean of the
/// curve by more than the prominence, and runs forward up to (excluding) the
/// first slice whose count is at or below the mean. Scanning resumes after
/// the window, so windows never overlap. Windows are numbered in temporal
/// order modulo `transitions_per_cycle`.
///
/// A curve without any qualifying peak yields no windows; finding some but
/// fewer than `transitions_per_cycle` is a detection error.
pub fn detect_windows(
    curve: &[u64],
    fps: f64,
    transitions_per_cycle: usize,
    prominence: Prominence,
) -> Result<Vec<IntegrationWindow>> {
    if curve.len() < 3 {
        return Err(Error::Argument(format!(
            "count curve needs at least 3 slices, got {}",
            curve.len()
        )));
    }
    if !(fps.is_finite() && fps > 0.0) {
        return Err(Error::Argument(format!("fps must be positive, got {fps}")));
    }
    if transitions_per_cycle == 0 {
        return Err(Error::Argument("transitions per cycle must be at least 1".into()));
    }
    let n = curve.len();
    let mean = curve.iter().sum::<u64>() as f64 / n as f64;
    let threshold = mean + prominence.resolve(mean);
    let c = |k: usize| curve[k] as f64;
    let is_local_max = |k: usize| {
        (k == 0 || curve[k] >= curve[k - 1]) && (k + 1 == n || curve[k] >= curve[k + 1])
    };

    let mut windows = Vec::new();
    let mut k = 0;
    while k < n {
        if c(k) > threshold && is_local_max(k) {
            let end = (k + 1..n).find(|&j| c(j) <= mean).unwrap_or(n);
            windows.push(IntegrationWindow {
                transition_index: windows.len() % transitions_per_cycle,
                start_slice: k,
                end_slice: end,
                tau: (end - k) as f64 / fps,
            });
            k = end;
        } else {
            k += 1;
        }
    }

    if !windows.is_empty() && windows.len() < transitions_per_cycle {
        return Err(Error::Detection {
            found: windows.len(),
            expected: transitions_per_cycle,
        });
    }
    Ok(windows)
}

/// Forward running sum: `out[k] = curve[k] + ... + curve[k + span - 1]`,
/// truncated at the end of the curve.
///
/// Bursty curves (many pixels crossing threshold in lockstep) dip to zero
/// between bursts of a single transition; summing ahead bridges those gaps
/// while keeping each peak at the onset of the busiest stretch. `span = 1`
/// returns the curve unchanged.
pub fn forward_sum(curve: &[u64], span: usize) -> Vec<u64> {
    let span = span.max(1);
    let mut out = vec![0u64; curve.len()];
    let mut acc: u64 = curve.iter().take(span).sum();
    for k in 0..curve.len() {
        out[k] = acc;
        acc -= curve[k];
        if let Some(v) = curve.get(k + span) {
            acc += v;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forward_sum_matches_direct_sums() {
        let c = [3u64, 0, 5, 1, 0, 0, 7];
        assert_eq!(forward_sum(&c, 1), c.to_vec());
        assert_eq!(forward_sum(&c, 3), vec![8, 6, 6, 1, 7, 7, 7]);
        assert_eq!(forward_sum(&c, 0), c.to_vec());
        assert!(forward_sum(&[], 4).is_empty());
    }

    #[test]
    fn flat_curve_has_no_windows() {
        assert!(detect_windows(&[5; 50], 600.0, 9, Prominence::default()).unwrap().is_empty());
        assert!(detect_windows(&[0; 50], 600.0, 9, Prominence::default()).unwrap().is_empty());
    }

    #[test]
    fn single_geometric_spike() {
        // baseline 10 over 100 slices, spike at slice 40 halving each slice
        let mut curve = vec![10u64; 100];
        let spike = [1000u64, 500, 250, 125, 62, 31, 15];
        curve[40..47].copy_from_slice(&spike);
        // mean = (93 * 10 + 1983) / 100 = 29.13
        let w = detect_windows(&curve, 600.0, 1, Prominence::default()).unwrap();
        assert_eq!(w.len(), 1);
        assert_eq!(w[0].start_slice, 40);
        // 31 > 29.13, 15 <= 29.13
        assert_eq!(w[0].end_slice, 46);
        assert!((w[0].tau - 6.0 / 600.0).abs() < 1e-15);
    }

    #[test]
    fn windows_are_numbered_modulo_n_and_disjoint() {
        let mut curve = vec![1u64; 300];
        for (i, start) in (10..300).step_by(30).enumerate() {
            curve[start] = 100 + i as u64;
            curve[start + 1] = 50;
            curve[start + 2] = 20;
        }
        let w = detect_windows(&curve, 600.0, 4, Prominence::default()).unwrap();
        assert_eq!(w.len(), 10);
        for (i, win) in w.iter().enumerate() {
            assert_eq!(win.transition_index, i % 4);
        }
        assert!(w.windows(2).all(|p| p[0].end_slice <= p[1].start_slice));
    }

    #[test]
    fn too_few_peaks_reports_count() {
        let mut curve = vec![1u64; 100];
        curve[20] = 90;
        curve[60] = 90;
        match detect_windows(&curve, 600.0, 9, Prominence::default()) {
            Err(Error::Detection { found: 2, expected: 9 }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn short_curve_is_rejected() {
        assert!(detect_windows(&[1, 2], 600.0, 1, Prominence::default()).is_err());
    }
}
