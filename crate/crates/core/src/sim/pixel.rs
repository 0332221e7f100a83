use serde::{Deserialize, Serialize};

use crate::aer::{Polarity, US_PER_S};
use crate::{Error, Result};

/// Comparator and photoreceptor parameters of a DVS pixel.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DvsPixelParams {
    /// Contrast threshold in log-intensity units.
    #[serde(rename = "C")]
    pub threshold: f64,
    /// Photoreceptor relaxation rate in 1/s.
    #[serde(rename = "b")]
    pub decay_rate: f64,
    /// Background activity in events per pixel per second.
    #[serde(default)]
    pub thermal_rate: f64,
    /// Standard deviation of the per-crossing threshold.
    #[serde(rename = "sigma_C", default)]
    pub threshold_sigma: f64,
}

impl Default for DvsPixelParams {
    fn default() -> Self {
        DvsPixelParams {
            threshold: 0.1,
            decay_rate: 50.0,
            thermal_rate: 0.0,
            threshold_sigma: 0.0,
        }
    }
}

impl DvsPixelParams {
    pub fn new(threshold: f64, decay_rate: f64) -> Result<Self> {
        let p = DvsPixelParams {
            threshold,
            decay_rate,
            ..Default::default()
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_thermal_rate(mut self, rate: f64) -> Self {
        self.thermal_rate = rate;
        self
    }

    pub fn with_threshold_sigma(mut self, sigma: f64) -> Self {
        self.threshold_sigma = sigma;
        self
    }

    pub fn is_noiseless(&self) -> bool {
        self.thermal_rate == 0.0 && self.threshold_sigma == 0.0
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.threshold.is_finite() && self.threshold > 0.0) {
            return Err(Error::Argument(format!("threshold C must be positive, got {}", self.threshold)));
        }
        if !(self.decay_rate.is_finite() && self.decay_rate > 0.0) {
            return Err(Error::Argument(format!("decay rate b must be positive, got {}", self.decay_rate)));
        }
        if !(self.thermal_rate.is_finite() && self.thermal_rate >= 0.0) {
            return Err(Error::Argument("thermal rate must be non-negative".into()));
        }
        if !(self.threshold_sigma.is_finite() && self.threshold_sigma >= 0.0) {
            return Err(Error::Argument("threshold sigma must be non-negative".into()));
        }
        Ok(())
    }
}

/// A step in log intensity: `f(t) = a u(t) + u0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepStimulus {
    pub a: f64,
    pub u0: f64,
}

impl StepStimulus {
    pub fn between(l_initial: f64, l_final: f64) -> Self {
        StepStimulus {
            a: l_final - l_initial,
            u0: l_initial,
        }
    }

    pub fn final_level(&self) -> f64 {
        self.u0 + self.a
    }

    /// Photoreceptor output `t` seconds after the step.
    pub fn response(&self, decay_rate: f64, t: f64) -> f64 {
        if t <= 0.0 {
            self.u0
        } else {
            self.final_level() - self.a * (-decay_rate * t).exp()
        }
    }
}

/// Memory of one pixel between flicker transitions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PixelState {
    /// Log intensity memorized at the last event.
    pub l_ref: f64,
    /// Current photoreceptor output.
    pub l_photo: f64,
    /// Time of the last emitted event in microseconds.
    pub t_last: Option<u64>,
}

impl PixelState {
    /// A pixel that has been exposed to `level` long enough to settle.
    pub fn settled(level: f64) -> Self {
        PixelState {
            l_ref: level,
            l_photo: level,
            t_last: None,
        }
    }
}

/// An event of a single pixel.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StepEvent {
    pub t: u64,
    pub p: Polarity,
}

/// Continuous-time crossing converted to the microsecond grid: the first tick
/// at which a sampled comparator would see the crossing.
#[inline]
pub(crate) fn to_us(t_seconds: f64) -> u64 {
    (t_seconds * US_PER_S).ceil().max(0.0) as u64
}

/// Advance a pixel through one constant-illumination segment.
///
/// The photoreceptor starts the segment at `state.l_photo` at time `t0`
/// (seconds) and relaxes towards `l_target` at rate `decay_rate` until `t1`.
/// Crossing `k` (counted from 1 within the segment) sits `offset(k)` away from
/// the segment's starting reference, so a fixed threshold is `k * C` rather
/// than a running sum that drifts by rounding. On a monotone exponential only
/// crossings in the direction of travel can occur, so crossing times are
/// solved in closed form.
pub(crate) fn relax_segment(
    state: &mut PixelState,
    l_target: f64,
    t0: f64,
    t1: f64,
    decay_rate: f64,
    mut offset: impl FnMut(u32) -> f64,
    out: &mut Vec<StepEvent>,
) {
    let l_start = state.l_photo;
    let span = l_start - l_target;
    if span != 0.0 {
        let dir = if l_target > l_start { 1.0 } else { -1.0 };
        let p = Polarity::from_sign(dir);
        let mut anchor = state.l_ref;
        for k in 1.. {
            let d = offset(k);
            let level = anchor + dir * d;
            // the exponential never reaches its target
            if (level - l_target) * dir >= 0.0 {
                break;
            }
            let ratio = (level - l_target) / span;
            let (t, crossed) = if ratio >= 1.0 {
                // already beyond a (jittered) threshold at segment start
                anchor = l_start - dir * d;
                (t0, l_start)
            } else {
                (t0 - ratio.ln() / decay_rate, level)
            };
            if t >= t1 {
                break;
            }
            let t_us = to_us(t);
            state.l_ref = crossed;
            state.t_last = Some(t_us);
            out.push(StepEvent { t: t_us, p });
        }
    }
    state.l_photo = if t1.is_finite() {
        l_target + span * (-decay_rate * (t1 - t0)).exp()
    } else {
        l_target
    };
}

/// Offsets for a fixed threshold `c`.
#[inline]
pub(crate) fn fixed_offsets(c: f64) -> impl FnMut(u32) -> f64 {
    move |k| k as f64 * c
}

/// Offsets accumulated from independently drawn thresholds.
pub(crate) fn sampled_offsets(mut draw: impl FnMut() -> f64) -> impl FnMut(u32) -> f64 {
    let mut acc = 0.0;
    move |_| {
        acc += draw();
        acc
    }
}

/// Noiseless events of a settled pixel whose log intensity steps from
/// `l_initial` to `l_final` at `t0` seconds.
///
/// Event `k` fires at `t0 - ln(1 - k C / |dL|) / b` for every `k >= 1` with
/// `k C < |dL|`; all polarities equal the sign of `dL`. Noise fields of
/// `params` are ignored.
pub fn simulate_pixel_step(
    l_initial: f64,
    l_final: f64,
    params: &DvsPixelParams,
    t0: f64,
) -> Result<Vec<StepEvent>> {
    params.validate()?;
    let mut state = PixelState::settled(l_initial);
    let mut out = Vec::new();
    relax_segment(
        &mut state,
        l_final,
        t0,
        f64::INFINITY,
        params.decay_rate,
        fixed_offsets(params.threshold),
        &mut out,
    );
    Ok(out)
}
