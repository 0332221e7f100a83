//! Color reconstruction for Dynamic Vision Sensor (DVS) event cameras under
//! active RGB flicker illumination.
//!
//! A static scene is lit by a light source that cycles through a program of
//! colors and intensities. Each flicker transition makes every DVS pixel emit
//! a burst of events whose count depends on the log-intensity change of the
//! light reflected by that scene point, which in turn depends on its color.
//! Averaging the per-pixel response to each transition gives a feature vector
//! that a linear least-squares model maps back to RGB.
//!
//! The crate is organised by pipeline stage:
//!
//! - [`aer`]: events, AER text/binary I/O, time binning into pseudo-frames.
//! - [`sim`]: a physics-based DVS simulator driven by a reflectance scene and
//!   a flicker schedule, so the whole pipeline can run without hardware.
//! - [`recon`]: integration-window detection, feature extraction and the
//!   pseudo-inverse LMMSE color estimator.
//! - [`calib`]: Harris corners, DLT/RANSAC homographies and image warping for
//!   aligning ground-truth RGB labels with DVS pixels.
//! - [`metrics`]: RMSE, L1, MS-SSIM, the combined training loss and
//!   patch-based color reports.
//! - [`pipeline`]: file-level commands that chain the stages, parameter
//!   sweeps and dataset export for network training.
//!
//! Runnable walkthroughs live in the crate's `examples/` directory.

pub mod aer;
pub mod calib;
mod error;
pub mod metrics;
pub mod pipeline;
pub mod recon;
pub mod sim;

pub use error::{Error, Result};
