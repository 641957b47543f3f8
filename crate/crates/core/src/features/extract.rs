use rayon::prelude::*;

use crate::cloud::PointCloud;
use crate::geometry::Point3;
use crate::{Error, Real, Result};

use super::descriptors::{color_features, geometric_features, COLOR_FEATURES, GEOMETRIC_FEATURES};
use super::eigen::{covariance, eigen3};
use super::matrix::{FeatureLayout, FeatureMatrix};
use super::pyramid::ScalePyramid;

#[derive(Default)]
struct Scratch<T> {
    idx: Vec<usize>,
    pts: Vec<Point3<T>>,
    cols: Vec<[T; 3]>,
}

/// Feature row for each query index of `cloud`, one block per scale.
///
/// Rows are computed independently (in parallel), so the output does not
/// depend on the number of worker threads.
pub fn extract_features<T: Real>(
    cloud: &PointCloud<T>,
    pyramid: &ScalePyramid<T>,
    query_indices: &[usize],
) -> Result<FeatureMatrix<T>> {
    if let Some(&bad) = query_indices.iter().find(|&&i| i >= cloud.len()) {
        return Err(Error::param(format!(
            "query index {bad} out of range for a cloud of {} points",
            cloud.len()
        )));
    }
    let layout = FeatureLayout::for_pyramid(pyramid);
    let cols = layout.columns();
    let mut data = vec![T::zero(); query_indices.len() * cols];
    let positions = cloud.positions();
    if cols > 0 {
        data.par_chunks_mut(cols)
            .zip(query_indices.par_iter())
            .try_for_each_init(Scratch::default, |scratch, (row, &qi)| {
                fill_row(pyramid, &positions[qi], row, scratch)
            })?;
    }
    Ok(FeatureMatrix::from_parts(query_indices.len(), layout, data))
}

/// Feature row of a single query position (any point, not necessarily in the
/// cloud).
pub fn extract_point<T: Real>(pyramid: &ScalePyramid<T>, p0: &Point3<T>) -> Result<Vec<T>> {
    let layout = FeatureLayout::for_pyramid(pyramid);
    let mut row = vec![T::zero(); layout.columns()];
    fill_row(pyramid, p0, &mut row, &mut Scratch::default())?;
    Ok(row)
}

fn fill_row<T: Real>(
    pyramid: &ScalePyramid<T>,
    p0: &Point3<T>,
    row: &mut [T],
    scratch: &mut Scratch<T>,
) -> Result<()> {
    let per_scale = row.len() / pyramid.num_scales();
    for (s, block) in row.chunks_mut(per_scale).enumerate() {
        pyramid.neighbor_indices(s, p0, &mut scratch.idx)?;
        if scratch.idx.is_empty() {
            // Only possible for query points outside the indexed cloud.
            block.fill(T::zero());
            continue;
        }
        let sc = &pyramid.scales()[s];
        let pts = sc.cloud.positions();
        scratch.pts.clear();
        scratch.pts.extend(scratch.idx.iter().map(|&i| pts[i]));
        let eig = eigen3(&covariance(&scratch.pts));
        block[..GEOMETRIC_FEATURES].copy_from_slice(&geometric_features(&scratch.pts, p0, &eig));
        if let Some(colors) = sc.cloud.colors() {
            scratch.cols.clear();
            scratch.cols.extend(scratch.idx.iter().map(|&i| colors[i]));
            block[GEOMETRIC_FEATURES..GEOMETRIC_FEATURES + COLOR_FEATURES]
                .copy_from_slice(&color_features(&scratch.cols));
        }
    }
    Ok(())
}
