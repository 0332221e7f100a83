//! Physics-based DVS simulator for a static scene under a flicker program.
//!
//! Each pixel sees the light reflected by its scene point. The log of that
//! intensity drives a first-order photoreceptor that relaxes exponentially
//! towards the new level after every flicker transition, and a comparator
//! fires an event whenever the photoreceptor output moves a contrast
//! threshold away from the level memorized at the previous event.

mod pixel;
mod ripple;
mod scene;
mod schedule;
mod simulate;

pub use pixel::{simulate_pixel_step, DvsPixelParams, PixelState, StepEvent, StepStimulus};
pub use ripple::{inject_ripple_artifact, RippleParams};
pub use scene::SceneReflectance;
pub use schedule::{FlickerSchedule, FlickerState, Transition};
pub use simulate::{log_intensity, radiance_at, simulate, SimConfig};
