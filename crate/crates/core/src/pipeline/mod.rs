//! End-to-end driver: configuration, in-process runs, sweeps, dataset export
//! and the file-level commands behind the `dvscolor` binary.

mod commands;
mod config;
mod dataset;
mod run;
mod sweep;
mod target;

pub use commands::*;
pub use config::{Illumination, Paths, PipelineConfig, SweepConfig};
pub use dataset::{export_dataset, split_for, DatasetSample, ExportedSample, Split};
pub use run::{
    analyze, checkerboard_mask, evaluate, parse_windows, reconstruct, windows_to_text, Analysis,
    Evaluation, RoundTrip,
};
pub use sweep::{format_sweep, run_sweep, SweepAxis, SweepRow};
pub use target::{color_target, color_target_patches, COLOR_TARGET, PATCH_SIZE};
