use std::collections::{BTreeMap, HashSet};

use rand::seq::index;

use crate::cloud::ClassId;
use crate::features::FeatureMatrix;
use crate::seed::{self, STREAM_BALANCED, STREAM_MINING};
use crate::{Error, Result};

use super::forest::{train_forest, ForestConfig, ForestModel};
use super::sampling::balanced_sample;

/// Schedule of the iterative training-set construction.
#[derive(Clone, Debug, PartialEq)]
pub struct MiningConfig {
    pub initial_per_class: usize,
    /// Maximum number of training rounds (forests trained).
    pub rounds: usize,
    /// Points added per round; `None` means `budget / 10`.
    pub add_per_round: Option<usize>,
    /// Cap on the training-set size.
    pub budget: usize,
    pub seed: u64,
}

impl Default for MiningConfig {
    fn default() -> Self {
        Self {
            initial_per_class: 1000,
            rounds: 5,
            add_per_round: None,
            budget: 50_000,
            seed: 0,
        }
    }
}

impl MiningConfig {
    pub fn add_per_round(&self) -> usize {
        self.add_per_round.unwrap_or(self.budget / 10)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RoundReport {
    pub training_size: usize,
    /// Misclassified non-ignored training points after this round's forest.
    pub errors: usize,
    pub errors_per_class: BTreeMap<ClassId, usize>,
    pub added: usize,
}

#[derive(Clone, Debug)]
pub struct MiningOutcome {
    pub model: ForestModel,
    /// Final training set, ascending.
    pub selected: Vec<usize>,
    pub rounds: Vec<RoundReport>,
}

/// Trains on a balanced seed set, then repeatedly predicts the whole training
/// cloud and adds a random subset of misclassified points (split across
/// classes in proportion to their error counts) until `rounds` forests have
/// been trained, the budget is reached or no errors remain.
pub fn mine_training_set(
    x: &FeatureMatrix<f64>,
    labels: &[ClassId],
    ignored: ClassId,
    forest_cfg: &ForestConfig,
    cfg: &MiningConfig,
) -> Result<MiningOutcome> {
    if x.rows() != labels.len() {
        return Err(Error::param(format!("{} feature rows but {} labels", x.rows(), labels.len())));
    }
    if cfg.rounds == 0 {
        return Err(Error::param("mining needs at least one round"));
    }
    let mut selected = balanced_sample(
        labels,
        cfg.initial_per_class,
        ignored,
        seed::derive(cfg.seed, STREAM_BALANCED),
    )?;
    if selected.len() > cfg.budget {
        return Err(Error::param(format!(
            "initial training set ({}) exceeds budget ({})",
            selected.len(),
            cfg.budget
        )));
    }
    let mut in_set: HashSet<usize> = selected.iter().copied().collect();
    let mut rng = seed::rng(seed::derive(cfg.seed, STREAM_MINING));
    let mut reports = Vec::new();

    loop {
        let y: Vec<ClassId> = selected.iter().map(|&i| labels[i]).collect();
        let model = train_forest(&x.select_rows(&selected), &y, forest_cfg)?;
        let pred = model.predict(x)?;

        let mut wrong: BTreeMap<ClassId, Vec<usize>> = BTreeMap::new();
        let mut errors_per_class = BTreeMap::new();
        let mut errors = 0;
        for (i, (&t, &p)) in labels.iter().zip(&pred).enumerate() {
            if t == ignored || t == p {
                continue;
            }
            errors += 1;
            *errors_per_class.entry(t).or_insert(0) += 1;
            if !in_set.contains(&i) {
                wrong.entry(t).or_default().push(i);
            }
        }
        let mut report = RoundReport {
            training_size: selected.len(),
            errors,
            errors_per_class,
            added: 0,
        };
        log::info!(
            "mining round {}: |T| = {}, training errors = {}",
            reports.len() + 1,
            report.training_size,
            report.errors
        );

        let candidates: usize = wrong.values().map(Vec::len).sum();
        let room = cfg.budget - selected.len();
        let n_add = cfg.add_per_round().min(room).min(candidates);
        if reports.len() + 1 >= cfg.rounds || n_add == 0 {
            reports.push(report);
            selected.sort_unstable();
            return Ok(MiningOutcome {
                model,
                selected,
                rounds: reports,
            });
        }

        for (class, quota) in proportional_quotas(&wrong, n_add) {
            let pool = &wrong[&class];
            for j in index::sample(&mut rng, pool.len(), quota) {
                let i = pool[j];
                in_set.insert(i);
                selected.push(i);
            }
        }
        report.added = n_add;
        reports.push(report);
    }
}

/// Splits `n` across classes proportionally to their pool sizes using the
/// largest-remainder rule (ties to the smaller class id).
fn proportional_quotas(pools: &BTreeMap<ClassId, Vec<usize>>, n: usize) -> Vec<(ClassId, usize)> {
    let total: usize = pools.values().map(Vec::len).sum();
    if total == 0 {
        return Vec::new();
    }
    let mut quotas: Vec<(ClassId, usize, usize)> = pools
        .iter()
        .map(|(&c, p)| {
            let exact = n * p.len();
            (c, exact / total, exact % total)
        })
        .collect();
    let assigned: usize = quotas.iter().map(|q| q.1).sum();
    let mut order: Vec<usize> = (0..quotas.len()).collect();
    order.sort_by(|&a, &b| quotas[b].2.cmp(&quotas[a].2).then(quotas[a].0.cmp(&quotas[b].0)));
    for &k in order.iter().take(n - assigned) {
        quotas[k].1 += 1;
    }
    quotas.into_iter().map(|(c, q, _)| (c, q)).collect()
}
