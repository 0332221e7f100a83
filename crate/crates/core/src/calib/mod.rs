//! Alignment of ground-truth RGB frames to sensor pixel coordinates.
//!
//! Corner detection is provided for building correspondences; matching
//! corners across the two sensors is left to the caller.

mod harris;
mod homography;
mod warp;

pub use harris::{harris_corners, harris_response, Corner, HarrisParams};
pub use homography::{
    estimate_homography_dlt, estimate_homography_ransac, parse_correspondences,
    write_correspondences, Correspondence, Homography, RansacFit, RansacParams,
};
pub use warp::warp_image;
