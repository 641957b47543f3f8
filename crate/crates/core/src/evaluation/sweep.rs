use std::time::Instant;

use crate::classifier::{balanced_sample, train_forest, ForestConfig};
use crate::cloud::{ClassCatalog, ClassId, PointCloud};
use crate::features::{build_pyramid, extract_features, FeatureMatrix, ScaleConfig};
use crate::seed::{self, STREAM_BALANCED, STREAM_FOREST};
use crate::{Error, Result};

use super::metrics::{confusion, ConfusionMatrix};

#[derive(Clone, Debug)]
pub struct SplitResult {
    pub confusion: ConfusionMatrix,
    pub mean_iou: f64,
    /// Pyramid construction plus extraction over the test cloud, seconds.
    pub test_extraction_seconds: f64,
    pub test_points: usize,
    pub predictions: Vec<ClassId>,
}

impl SplitResult {
    pub fn points_per_second(&self) -> f64 {
        self.test_points as f64 / self.test_extraction_seconds
    }
}

fn labels_of(cloud: &PointCloud<f64>, what: &str) -> Result<Vec<ClassId>> {
    cloud
        .labels()
        .map(<[ClassId]>::to_vec)
        .ok_or_else(|| Error::param(format!("{what} cloud has no labels")))
}

fn all_features(cloud: &PointCloud<f64>, cfg: &ScaleConfig) -> Result<FeatureMatrix<f64>> {
    let pyramid = build_pyramid(cloud, cfg)?;
    let all: Vec<usize> = (0..cloud.len()).collect();
    extract_features(cloud, &pyramid, &all)
}

/// Balanced-protocol train/test run: extract features on both clouds, train
/// on `n_per_class` points per class of `train`, predict and score every
/// point of `test`.
pub fn evaluate_split(
    train: &PointCloud<f64>,
    test: &PointCloud<f64>,
    scale_cfg: &ScaleConfig,
    forest_cfg: &ForestConfig,
    n_per_class: usize,
    catalog: &ClassCatalog,
    seed: u64,
) -> Result<SplitResult> {
    let train_labels = labels_of(train, "training")?;
    let test_labels = labels_of(test, "test")?;
    let x_train = all_features(train, scale_cfg)?;

    let start = Instant::now();
    let x_test = all_features(test, scale_cfg)?;
    let secs = start.elapsed().as_secs_f64();

    let idx = balanced_sample(
        &train_labels,
        n_per_class,
        catalog.ignored(),
        seed::derive(seed, STREAM_BALANCED),
    )?;
    let y: Vec<ClassId> = idx.iter().map(|&i| train_labels[i]).collect();
    let cfg = ForestConfig {
        seed: seed::derive(seed, STREAM_FOREST),
        ..forest_cfg.clone()
    };
    let model = train_forest(&x_train.select_rows(&idx), &y, &cfg)?;
    let predictions = model.predict(&x_test)?;
    let cm = confusion(&test_labels, &predictions, catalog)?;
    let mean_iou = cm
        .mean_iou()
        .ok_or_else(|| Error::param("test cloud has no scored points"))?;
    Ok(SplitResult {
        confusion: cm,
        mean_iou,
        test_extraction_seconds: secs,
        test_points: test.len(),
        predictions,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub rho: f64,
    pub mean_iou: f64,
    pub points_per_second: f64,
}

/// [`evaluate_split`] for each rho in turn, everything else fixed.
#[allow(clippy::too_many_arguments)]
pub fn rho_sweep(
    train: &PointCloud<f64>,
    test: &PointCloud<f64>,
    rhos: &[f64],
    base: &ScaleConfig,
    forest_cfg: &ForestConfig,
    n_per_class: usize,
    catalog: &ClassCatalog,
    seed: u64,
) -> Result<Vec<SweepRow>> {
    rhos.iter()
        .map(|&rho| {
            let cfg = ScaleConfig::new(base.r0, base.scales, base.phi, rho)?;
            let r = evaluate_split(train, test, &cfg, forest_cfg, n_per_class, catalog, seed)?;
            log::info!(
                "rho {rho}: mean IoU {:.4}, {:.0} points/s",
                r.mean_iou,
                r.points_per_second()
            );
            Ok(SweepRow {
                rho,
                mean_iou: r.mean_iou,
                points_per_second: r.points_per_second(),
            })
        })
        .collect()
}
