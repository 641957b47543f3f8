use crate::cloud::{ClassCatalog, ClassId};
use crate::{Error, Result};

/// `K x K` counts over the catalog classes; entry `(i, j)` counts points of
/// true class `i` predicted as class `j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfusionMatrix {
    classes: Vec<ClassId>,
    counts: Vec<u64>,
}

/// Builds the confusion matrix, skipping points whose truth or prediction is
/// the catalog's ignored id.
pub fn confusion(truth: &[ClassId], pred: &[ClassId], catalog: &ClassCatalog) -> Result<ConfusionMatrix> {
    if truth.len() != pred.len() {
        return Err(Error::param(format!(
            "{} ground-truth labels but {} predictions",
            truth.len(),
            pred.len()
        )));
    }
    let mut cm = ConfusionMatrix::new(catalog.ids().collect());
    let k = cm.classes.len();
    let ignored = catalog.ignored();
    let lookup = |id: ClassId| {
        catalog
            .index_of(id)
            .ok_or_else(|| Error::param(format!("class id {id} not in catalog")))
    };
    for (&t, &p) in truth.iter().zip(pred) {
        if t == ignored || p == ignored {
            continue;
        }
        let (i, j) = (lookup(t)?, lookup(p)?);
        cm.counts[i * k + j] += 1;
    }
    Ok(cm)
}

impl ConfusionMatrix {
    pub fn new(classes: Vec<ClassId>) -> Self {
        let k = classes.len();
        Self {
            classes,
            counts: vec![0; k * k],
        }
    }

    pub fn classes(&self) -> &[ClassId] {
        &self.classes
    }

    pub fn get(&self, truth: usize, pred: usize) -> u64 {
        self.counts[truth * self.classes.len() + pred]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// `(TP, FP, FN)` of class index `i`.
    pub fn tp_fp_fn(&self, i: usize) -> (u64, u64, u64) {
        let k = self.classes.len();
        let tp = self.get(i, i);
        let row: u64 = (0..k).map(|j| self.get(i, j)).sum();
        let col: u64 = (0..k).map(|j| self.get(j, i)).sum();
        (tp, col - tp, row - tp)
    }

    /// `TP / (TP + FP + FN)` per class; `None` when the class appears in
    /// neither truth nor prediction.
    pub fn iou_per_class(&self) -> Vec<Option<f64>> {
        (0..self.classes.len())
            .map(|i| {
                let (tp, fp, fn_) = self.tp_fp_fn(i);
                let den = tp + fp + fn_;
                (den > 0).then(|| tp as f64 / den as f64)
            })
            .collect()
    }

    /// Mean over the defined per-class IoUs.
    pub fn mean_iou(&self) -> Option<f64> {
        let defined: Vec<f64> = self.iou_per_class().into_iter().flatten().collect();
        (!defined.is_empty()).then(|| defined.iter().sum::<f64>() / defined.len() as f64)
    }

    pub fn f1_per_class(&self) -> Vec<Option<f64>> {
        (0..self.classes.len())
            .map(|i| {
                let (tp, fp, fn_) = self.tp_fp_fn(i);
                f1_score(tp, fp, fn_)
            })
            .collect()
    }

    pub fn overall_accuracy(&self) -> Option<f64> {
        let total = self.total();
        let diag: u64 = (0..self.classes.len()).map(|i| self.get(i, i)).sum();
        (total > 0).then(|| diag as f64 / total as f64)
    }
}

/// `2TP / (2TP + FP + FN)`, `None` when all three are zero.
pub fn f1_score(tp: u64, fp: u64, fn_: u64) -> Option<f64> {
    let den = 2 * tp + fp + fn_;
    (den > 0).then(|| 2.0 * tp as f64 / den as f64)
}

/// Converts a class F1 score to IoU: `F1 / (2 - F1)`.
pub fn f1_to_iou(f1: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&f1) {
        return Err(Error::param(format!("F1 score {f1} outside [0, 1]")));
    }
    Ok(f1 / (2.0 - f1))
}
