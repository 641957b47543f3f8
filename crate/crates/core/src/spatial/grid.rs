use crate::cloud::PointCloud;
use crate::geometry::Point3;
use crate::{Error, Real, Result};

/// Integer cell coordinates `floor((p - origin) / cell_size)`.
pub type VoxelKey = [i64; 3];

/// A regular grid of cubic cells anchored at `origin`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec<T> {
    cell_size: T,
    origin: Point3<T>,
}

impl<T: Real> GridSpec<T> {
    pub fn new(cell_size: T, origin: Point3<T>) -> Result<Self> {
        if !(cell_size > T::zero() && cell_size.is_finite()) {
            return Err(Error::param(format!("cell size must be positive and finite, got {cell_size}")));
        }
        if !origin.is_finite() {
            return Err(Error::param("grid origin must be finite"));
        }
        Ok(Self { cell_size, origin })
    }

    /// Grid anchored at the cloud's minimum corner (the origin for an empty
    /// cloud).
    pub fn anchored(cloud: &PointCloud<T>, cell_size: T) -> Result<Self> {
        let origin = cloud.bounds().map_or_else(Point3::zero, |(lo, _)| lo);
        Self::new(cell_size, origin)
    }

    pub fn cell_size(&self) -> T {
        self.cell_size
    }

    pub fn origin(&self) -> Point3<T> {
        self.origin
    }

    pub fn key(&self, p: &Point3<T>) -> VoxelKey {
        voxel_key(p, &self.origin, self.cell_size)
    }

    /// Axis-aligned `[lo, hi]` bounds of a cell.
    pub fn cell_bounds(&self, key: VoxelKey) -> (Point3<T>, Point3<T>) {
        let c = |k: i64, o: T| o + T::c(k as f64) * self.cell_size;
        let lo = Point3::new(c(key[0], self.origin.x), c(key[1], self.origin.y), c(key[2], self.origin.z));
        let hi = Point3::new(
            c(key[0] + 1, self.origin.x),
            c(key[1] + 1, self.origin.y),
            c(key[2] + 1, self.origin.z),
        );
        (lo, hi)
    }
}

pub fn voxel_key<T: Real>(p: &Point3<T>, origin: &Point3<T>, cell: T) -> VoxelKey {
    let k = |v: T, o: T| ((v - o) / cell).floor().to_i64().unwrap_or(i64::MAX);
    [k(p.x, origin.x), k(p.y, origin.y), k(p.z, origin.z)]
}

/// Replaces the points of every non-empty cell by their barycenter (and mean
/// color). Output is ordered by ascending voxel key; labels are dropped.
pub fn grid_subsample<T: Real>(cloud: &PointCloud<T>, grid: &GridSpec<T>) -> PointCloud<T> {
    let pts = cloud.positions();
    let mut keyed: Vec<(VoxelKey, u32)> = pts
        .iter()
        .enumerate()
        .map(|(i, p)| (grid.key(p), i as u32))
        .collect();
    keyed.sort_unstable();

    let colors = cloud.colors();
    let mut out_pts = Vec::new();
    let mut out_cols = colors.map(|_| Vec::new());
    for run in keyed.chunk_by(|a, b| a.0 == b.0) {
        let n = T::from_usize_(run.len());
        let sum = run
            .iter()
            .fold(Point3::zero(), |acc, &(_, i)| acc + pts[i as usize]);
        out_pts.push(sum / n);
        if let (Some(src), Some(dst)) = (colors, out_cols.as_mut()) {
            let mut c = [T::zero(); 3];
            for &(_, i) in run {
                for (a, v) in c.iter_mut().zip(src[i as usize]) {
                    *a = *a + v;
                }
            }
            // Rounding may push a mean of all-ones colors a hair past 1.
            dst.push(c.map(|v| (v / n).min(T::one())));
        }
    }
    PointCloud::new(out_pts, out_cols, None).expect("barycenters of a valid cloud are valid")
}
