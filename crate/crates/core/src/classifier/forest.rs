use rand::Rng;
use rayon::prelude::*;

use crate::cloud::ClassId;
use crate::features::{FeatureLayout, FeatureMatrix};
use crate::seed::{self, STREAM_FOREST};
use crate::{Error, Result};

use super::tree::{grow_tree, Tree, TreeParams};

#[derive(Clone, Debug, PartialEq)]
pub struct ForestConfig {
    pub n_trees: usize,
    /// `None` grows trees until leaves are pure.
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
    /// Candidate columns per split; `None` means `ceil(sqrt(dim))`.
    pub features_per_split: Option<usize>,
    pub bootstrap: bool,
    pub seed: u64,
}

impl Default for ForestConfig {
    fn default() -> Self {
        Self {
            n_trees: 100,
            max_depth: Some(25),
            min_samples_leaf: 1,
            features_per_split: None,
            bootstrap: true,
            seed: 0,
        }
    }
}

impl ForestConfig {
    pub fn features_per_split_for(&self, dim: usize) -> usize {
        self.features_per_split
            .unwrap_or_else(|| (dim as f64).sqrt().ceil() as usize)
            .clamp(1, dim.max(1))
    }

    fn validate(&self, dim: usize) -> Result<()> {
        if self.n_trees == 0 {
            return Err(Error::param("n_trees must be >= 1"));
        }
        if self.min_samples_leaf == 0 {
            return Err(Error::param("min_samples_leaf must be >= 1"));
        }
        if let Some(f) = self.features_per_split {
            if f == 0 || f > dim {
                return Err(Error::param(format!("features_per_split {f} outside [1, {dim}]")));
            }
        }
        Ok(())
    }
}

/// Trained ensemble. Columns of [`ClassProbabilities`] follow `classes`
/// (ascending class id).
#[derive(Clone, Debug, PartialEq)]
pub struct ForestModel {
    pub trees: Vec<Tree>,
    pub classes: Vec<ClassId>,
    pub n_features: usize,
    /// Column layout of the training features, checked at prediction time.
    pub layout: FeatureLayout,
    pub seed: u64,
}

/// Row-major `rows x classes.len()` probabilities.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassProbabilities {
    pub classes: Vec<ClassId>,
    pub values: Vec<f64>,
}

impl ClassProbabilities {
    pub fn rows(&self) -> usize {
        self.values.len() / self.classes.len().max(1)
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let k = self.classes.len();
        &self.values[i * k..(i + 1) * k]
    }

    /// Arg-max class per row; ties go to the smaller class id.
    pub fn argmax(&self) -> Vec<ClassId> {
        (0..self.rows())
            .map(|i| {
                let row = self.row(i);
                let mut best = 0;
                for (k, &p) in row.iter().enumerate() {
                    if p > row[best] {
                        best = k;
                    }
                }
                self.classes[best]
            })
            .collect()
    }
}

pub fn train_forest(x: &FeatureMatrix<f64>, y: &[ClassId], cfg: &ForestConfig) -> Result<ForestModel> {
    if x.rows() != y.len() {
        return Err(Error::param(format!("{} feature rows but {} labels", x.rows(), y.len())));
    }
    let dim = x.cols();
    if dim == 0 {
        return Err(Error::param("feature matrix has no columns"));
    }
    cfg.validate(dim)?;
    if x.data().iter().any(|v| !v.is_finite()) {
        return Err(Error::param("non-finite feature value"));
    }
    let mut classes = y.to_vec();
    classes.sort_unstable();
    classes.dedup();
    if classes.len() < 2 {
        return Err(Error::Training(format!(
            "need at least 2 distinct classes, found {}",
            classes.len()
        )));
    }
    if classes.len() > u16::MAX as usize {
        return Err(Error::Training("too many classes".into()));
    }
    let yi: Vec<u16> = y
        .iter()
        .map(|c| classes.binary_search(c).unwrap() as u16)
        .collect();
    let params = TreeParams {
        n_classes: classes.len(),
        max_depth: cfg.max_depth.unwrap_or(usize::MAX),
        min_samples_leaf: cfg.min_samples_leaf,
        features_per_split: cfg.features_per_split_for(dim),
    };
    let n = x.rows();
    let trees = (0..cfg.n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = seed::rng(seed::derive_indexed(cfg.seed, STREAM_FOREST, t as u64));
            let samples: Vec<u32> = if cfg.bootstrap {
                (0..n).map(|_| rng.random_range(0..n as u32)).collect()
            } else {
                (0..n as u32).collect()
            };
            grow_tree(x, &yi, samples, &params, &mut rng)
        })
        .collect();
    Ok(ForestModel {
        trees,
        classes,
        n_features: dim,
        layout: FeatureLayout {
            origin: None,
            ..x.layout().clone()
        },
        seed: cfg.seed,
    })
}

impl ForestModel {
    /// Rejects feature matrices whose layout differs from the training one.
    pub fn check_features(&self, x: &FeatureMatrix<f64>) -> Result<()> {
        let l = x.layout();
        if (self.layout.config.is_some() || l.config.is_some()) && !self.layout.compatible(l) {
            return Err(Error::Model(format!(
                "feature fingerprint mismatch: model expects {} scales x {} features {:?}, got {} x {} {:?}",
                self.layout.scales, self.layout.per_scale, self.layout.config, l.scales, l.per_scale, l.config
            )));
        }
        if x.cols() != self.n_features {
            return Err(Error::param(format!(
                "model expects {} feature columns, got {}",
                self.n_features,
                x.cols()
            )));
        }
        Ok(())
    }

    pub fn predict_proba(&self, x: &FeatureMatrix<f64>) -> Result<ClassProbabilities> {
        self.check_features(x)?;
        let k = self.classes.len();
        let mut values = vec![0.0; x.rows() * k];
        let inv = 1.0 / self.trees.len() as f64;
        values.par_chunks_mut(k).enumerate().for_each(|(i, out)| {
            let row = x.row(i);
            for t in &self.trees {
                for (o, p) in out.iter_mut().zip(t.leaf_for(row)) {
                    *o += p;
                }
            }
            out.iter_mut().for_each(|o| *o *= inv);
        });
        Ok(ClassProbabilities {
            classes: self.classes.clone(),
            values,
        })
    }

    pub fn predict(&self, x: &FeatureMatrix<f64>) -> Result<Vec<ClassId>> {
        Ok(self.predict_proba(x)?.argmax())
    }
}

pub fn predict_proba(model: &ForestModel, x: &FeatureMatrix<f64>) -> Result<ClassProbabilities> {
    model.predict_proba(x)
}

pub fn predict(model: &ForestModel, x: &FeatureMatrix<f64>) -> Result<Vec<ClassId>> {
    model.predict(x)
}
