use rayon::prelude::*;

use crate::classifier::{balanced_sample, train_forest, ForestConfig};
use crate::cloud::{ClassCatalog, ClassId};
use crate::features::FeatureMatrix;
use crate::seed::{self, STREAM_FOREST, STREAM_TRIAL};
use crate::{Error, Result};

use super::metrics::confusion;

#[derive(Clone, Debug, PartialEq)]
pub struct ClassTrialStats {
    pub class: ClassId,
    pub mean: f64,
    pub std: f64,
    /// Trials in which the class IoU was defined.
    pub defined: usize,
}

/// IoU statistics over repeated random train/test splits. Standard
/// deviations use the `n - 1` (sample) normalization.
#[derive(Clone, Debug, PartialEq)]
pub struct TrialStats {
    pub trials: usize,
    pub classes: Vec<ClassTrialStats>,
    pub mean_iou: f64,
    pub mean_iou_std: f64,
    /// Per-trial mean IoU, in trial order.
    pub per_trial_mean_iou: Vec<f64>,
}

pub(crate) fn mean_std(v: &[f64]) -> (f64, f64) {
    if v.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (mean, 0.0);
    }
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Trains on `n_per_class` random points per class and scores on all other
/// points, `trials` times with seeds derived from `seed`.
pub fn repeated_trials(
    x: &FeatureMatrix<f64>,
    labels: &[ClassId],
    catalog: &ClassCatalog,
    n_per_class: usize,
    trials: usize,
    forest_cfg: &ForestConfig,
    seed: u64,
) -> Result<TrialStats> {
    if x.rows() != labels.len() {
        return Err(Error::param(format!("{} feature rows but {} labels", x.rows(), labels.len())));
    }
    if trials < 2 {
        return Err(Error::param("repeated trials need trials >= 2"));
    }
    for id in catalog.ids() {
        if !labels.contains(&id) {
            return Err(Error::param(format!("class {id} has no labeled points")));
        }
    }
    let ignored = catalog.ignored();

    let per_trial: Vec<(Vec<Option<f64>>, f64)> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let s = seed::derive_indexed(seed, STREAM_TRIAL, t as u64);
            let train = balanced_sample(labels, n_per_class, ignored, s)?;
            let y: Vec<ClassId> = train.iter().map(|&i| labels[i]).collect();
            let cfg = ForestConfig {
                seed: seed::derive(s, STREAM_FOREST),
                ..forest_cfg.clone()
            };
            let model = train_forest(&x.select_rows(&train), &y, &cfg)?;

            let mut in_train = vec![false; labels.len()];
            train.iter().for_each(|&i| in_train[i] = true);
            let test: Vec<usize> = (0..labels.len()).filter(|&i| !in_train[i]).collect();
            let pred = model.predict(&x.select_rows(&test))?;
            let truth: Vec<ClassId> = test.iter().map(|&i| labels[i]).collect();
            let cm = confusion(&truth, &pred, catalog)?;
            let mean = cm
                .mean_iou()
                .ok_or_else(|| Error::param("no scored points in test split"))?;
            Ok((cm.iou_per_class(), mean))
        })
        .collect::<Result<_>>()?;

    let classes = catalog
        .ids()
        .enumerate()
        .map(|(k, class)| {
            let vals: Vec<f64> = per_trial.iter().filter_map(|(iou, _)| iou[k]).collect();
            let (mean, std) = mean_std(&vals);
            ClassTrialStats {
                class,
                mean,
                std,
                defined: vals.len(),
            }
        })
        .collect();
    let means: Vec<f64> = per_trial.iter().map(|(_, m)| *m).collect();
    let (mean_iou, mean_iou_std) = mean_std(&means);
    Ok(TrialStats {
        trials,
        classes,
        mean_iou,
        mean_iou_std,
        per_trial_mean_iou: means,
    })
}
