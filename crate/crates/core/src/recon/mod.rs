//! Linear color reconstruction: integration windows, per-pixel feature
//! vectors and the least-squares (LMMSE) feature-to-RGB estimator.

mod features;
mod lmmse;
mod pinv;
mod window;

pub use features::{extract_features, FeatureImage};
pub use lmmse::{apply, fit_lmmse, fit_from_images, LinearModel};
pub use pinv::{pseudo_inverse, DEFAULT_PINV_TOLERANCE};
pub use window::{detect_windows, forward_sum, IntegrationWindow, Prominence};
