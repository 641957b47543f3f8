//! Voxel-grid subsampling and exact fixed-radius neighbor queries.

mod grid;
mod kdtree;

pub use grid::{grid_subsample, voxel_key, GridSpec, VoxelKey};
pub use kdtree::{build_index, KdTree};
