use crate::cloud::PointCloud;
use crate::geometry::Point3;
use crate::spatial::{grid_subsample, GridSpec, KdTree};
use crate::{Error, Real, Result};

use super::config::ScaleConfig;

/// One level of the pyramid: query radius, subsampled support cloud and its
/// index.
#[derive(Clone, Debug)]
pub struct Scale<T> {
    pub radius: T,
    pub grid: GridSpec<T>,
    pub cloud: PointCloud<T>,
    pub index: KdTree<T>,
}

/// Subsampled support clouds for every scale, all on grids sharing one
/// origin (the input cloud's minimum corner).
#[derive(Clone, Debug)]
pub struct ScalePyramid<T> {
    config: ScaleConfig,
    origin: Point3<T>,
    scales: Vec<Scale<T>>,
}

/// Points of one neighborhood, with colors when the cloud has them.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Neighborhood<T> {
    pub positions: Vec<Point3<T>>,
    pub colors: Option<Vec<[T; 3]>>,
}

pub fn build_pyramid<T: Real>(cloud: &PointCloud<T>, cfg: &ScaleConfig) -> Result<ScalePyramid<T>> {
    ScalePyramid::build(cloud, cfg)
}

impl<T: Real> ScalePyramid<T> {
    pub fn build(cloud: &PointCloud<T>, cfg: &ScaleConfig) -> Result<Self> {
        cfg.validate()?;
        let (origin, _) = cloud
            .bounds()
            .ok_or_else(|| Error::param("cannot build a scale pyramid over an empty cloud"))?;
        let scales = (0..cfg.scales)
            .map(|s| {
                let grid = GridSpec::new(T::c(cfg.cell_size(s)), origin)?;
                let sub = grid_subsample(cloud, &grid);
                let index = KdTree::build(sub.positions());
                log::debug!(
                    "scale {s}: radius {} cell {} -> {} points",
                    cfg.radius(s),
                    cfg.cell_size(s),
                    sub.len()
                );
                Ok(Scale {
                    radius: T::c(cfg.radius(s)),
                    grid,
                    cloud: sub,
                    index,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            config: *cfg,
            origin,
            scales,
        })
    }

    pub fn config(&self) -> &ScaleConfig {
        &self.config
    }

    pub fn origin(&self) -> Point3<T> {
        self.origin
    }

    pub fn num_scales(&self) -> usize {
        self.scales.len()
    }

    pub fn scale(&self, s: usize) -> Result<&Scale<T>> {
        self.scales
            .get(s)
            .ok_or_else(|| Error::param(format!("scale {s} out of range (0..{})", self.scales.len())))
    }

    pub fn scales(&self) -> &[Scale<T>] {
        &self.scales
    }

    pub fn has_colors(&self) -> bool {
        self.scales.first().is_some_and(|s| s.cloud.has_colors())
    }

    /// Indices into the scale-`s` cloud within `r_s` of `p0`, ascending.
    pub fn neighbor_indices(&self, s: usize, p0: &Point3<T>, out: &mut Vec<usize>) -> Result<()> {
        let sc = self.scale(s)?;
        sc.index.radius_query_into(p0, sc.radius, out)
    }

    pub fn neighborhood(&self, s: usize, p0: &Point3<T>) -> Result<Neighborhood<T>> {
        let mut idx = Vec::new();
        self.neighbor_indices(s, p0, &mut idx)?;
        let sc = &self.scales[s];
        let pts = sc.cloud.positions();
        Ok(Neighborhood {
            positions: idx.iter().map(|&i| pts[i]).collect(),
            colors: sc.cloud.colors().map(|c| idx.iter().map(|&i| c[i]).collect()),
        })
    }
}
