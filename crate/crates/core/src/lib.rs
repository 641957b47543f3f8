//! Point-wise semantic classification of 3D point clouds with multiscale
//! spherical neighborhoods.
//!
//! The pipeline is: grid subsampling of the input cloud at one cell size per
//! scale ([`spatial`]), exact radius queries into each subsampled cloud,
//! covariance/moment features per scale ([`features`]), a random forest
//! trained on balanced or iteratively mined training sets ([`classifier`]),
//! and IoU-based scoring ([`evaluation`]).
//!
//! The geometric core is generic over the scalar type (`f32` or `f64`, see
//! [`Real`]); the aliases at the crate root fix it to `f64`, which is what the
//! file loaders and the classifier use.

pub mod classifier;
pub mod cli;
pub mod cloud;
pub mod config;
pub mod error;
pub mod evaluation;
pub mod features;
pub mod geometry;
pub mod io;
pub mod scalar;
pub mod seed;
pub mod spatial;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Point3 = geometry::Point3<f64>;
pub type Point3f = geometry::Point3<f32>;
pub type PointCloud = cloud::PointCloud<f64>;
pub type PointCloudf = cloud::PointCloud<f32>;
pub type GridSpec = spatial::GridSpec<f64>;
pub type SpatialIndex = spatial::KdTree<f64>;
pub type ScalePyramid = features::ScalePyramid<f64>;
pub type EigenTriple = features::EigenTriple<f64>;
pub type SymMat3 = features::SymMat3<f64>;
pub type FeatureMatrix = features::FeatureMatrix<f64>;

pub use classifier::{ForestConfig, ForestModel, MiningConfig};
pub use cloud::ClassCatalog;
pub use config::RunConfig;
pub use evaluation::{ConfusionMatrix, TrialStats};
pub use features::ScaleConfig;
