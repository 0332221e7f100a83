//! Phenomenological injector for the expanding "ripple" artifact: pixels that
//! fire because their neighbours fired, seen as a ring of spurious events
//! travelling outward from a source pixel.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use crate::aer::{Event, EventStream, Polarity, US_PER_S};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RippleParams {
    /// Source pixel `(x, y)`.
    pub center: (f64, f64),
    /// Radial speed of the wavefront in pixels per second.
    pub speed: f64,
    /// Mean number of spurious events per pixel swept by the wavefront.
    pub amplitude: f64,
    /// Onset of the ripple in microseconds.
    pub t_start: u64,
    /// Half-width of the annulus in pixels.
    pub width: f64,
    /// Radius at which the ripple dies out, in pixels.
    pub max_radius: f64,
}

impl RippleParams {
    /// Distance of `(x, y)` from the wavefront at time `t_us`.
    pub fn front_distance(&self, x: u16, y: u16, t_us: u64) -> f64 {
        let r = ((x as f64 - self.center.0).powi(2) + (y as f64 - self.center.1).powi(2)).sqrt();
        let front = self.speed * (t_us as f64 - self.t_start as f64) / US_PER_S;
        (r - front).abs()
    }
}

/// Add ripple events to `stream`. Every added event satisfies
/// `front_distance(x, y, t) <= width`. A zero amplitude returns the input
/// unchanged; a positive amplitude always adds at least one event at the
/// source pixel.
pub fn inject_ripple_artifact(
    stream: &EventStream,
    params: &RippleParams,
    seed: u64,
) -> Result<EventStream> {
    if !(params.amplitude.is_finite() && params.amplitude >= 0.0) {
        return Err(Error::Argument("ripple amplitude must be non-negative".into()));
    }
    if !(params.speed.is_finite() && params.speed > 0.0) {
        return Err(Error::Argument("ripple speed must be positive".into()));
    }
    if !(params.width >= 0.0 && params.max_radius >= 0.0) {
        return Err(Error::Argument("ripple width and radius must be non-negative".into()));
    }
    if params.amplitude == 0.0 {
        return Ok(stream.clone());
    }
    let res = stream.resolution();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let counts = Poisson::new(params.amplitude).map_err(|e| Error::Argument(e.to_string()))?;
    let to_us = |s: f64| s * US_PER_S / params.speed;

    let mut added = Vec::new();
    for (x, y) in res.pixels() {
        let r = ((x as f64 - params.center.0).powi(2) + (y as f64 - params.center.1).powi(2)).sqrt();
        if r > params.max_radius {
            continue;
        }
        // integer times whose wavefront lies within `width` of r
        let lo = (params.t_start as f64 + to_us((r - params.width).max(0.0))).ceil() as u64;
        let hi = (params.t_start as f64 + to_us(r + params.width)).floor() as u64;
        if lo > hi {
            continue;
        }
        let n = counts.sample(&mut rng) as usize;
        for _ in 0..n {
            let t = rng.random_range(lo..=hi);
            let p = if rng.random_bool(0.5) { Polarity::On } else { Polarity::Off };
            added.push(Event::new(x, y, t, p));
        }
    }
    if added.is_empty() {
        let cx = params.center.0.round().clamp(0.0, res.width.saturating_sub(1) as f64) as u16;
        let cy = params.center.1.round().clamp(0.0, res.height.saturating_sub(1) as f64) as u16;
        if res.contains(cx, cy) {
            added.push(Event::new(cx, cy, params.t_start, Polarity::On));
        }
    }
    let ripple = EventStream::new(res, added)?;
    stream.merge(&ripple)
}
