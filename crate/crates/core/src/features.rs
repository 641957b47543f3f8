//! Multiscale spherical neighborhood features.
//!
//! For each scale `s` the input cloud is grid-subsampled with cell size
//! `r_s / rho` where `r_s = r0 * phi^s`; the neighborhood of a query point at
//! scale `s` is the closed ball of radius `r_s` in that subsampled cloud.
//! Each neighborhood yields 18 geometric values (plus 6 color values when the
//! cloud has colors), laid out scale-major in the [`FeatureMatrix`].

mod config;
mod descriptors;
mod eigen;
mod extract;
mod matrix;
mod pyramid;

pub use config::ScaleConfig;
pub use descriptors::{
    color_features, feature_names, geometric_features, COLOR_FEATURES, COLOR_FEATURE_NAMES,
    GEOMETRIC_FEATURES, GEOMETRIC_FEATURE_NAMES,
};
pub use eigen::{covariance, eigen3, EigenTriple, SymMat3};
pub use extract::{extract_features, extract_point};
pub use matrix::{FeatureLayout, FeatureMatrix};
pub use pyramid::{build_pyramid, Neighborhood, Scale, ScalePyramid};
