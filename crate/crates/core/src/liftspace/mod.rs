//! Lifting images into the 5D space of position, orientation, intensity and curvature.

pub mod curvature;
pub mod fft;
pub mod image;
pub mod junctions;
pub mod l5d;
pub mod lift;
pub mod netpbm;
pub mod preprocess;
pub mod score;
pub mod wavelet;

pub use curvature::{
    curvature_confidence, multiscale_curvature, multiscale_curvature_with_selection, ConfidenceMap, CurvatureMap,
    CurvatureParams, LiftedField,
};
pub use image::{Image2D, SegmentationMask};
pub use junctions::fallback_junctions;
pub use lift::{
    crop_patch, interest_points, lift5d, lift_image, LiftConfig, LiftedFeatureMap, LiftedPatch, LiftedPoint, Lifting,
};
pub use preprocess::{preprocess, preprocess_gray};
pub use score::{dominant_orientation, orientation_score, OrientationMap, OrientationScore};
pub use wavelet::{CakeParams, FilterBank};
