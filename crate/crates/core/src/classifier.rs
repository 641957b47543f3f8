//! Random forest classifier and training-set construction.
//!
//! Two ways of choosing training points are provided: [`balanced_sample`]
//! (the same number of random points per class) and
//! [`mine_training_set`] (start balanced, then repeatedly retrain and add a
//! random subset of the currently misclassified training points).

mod forest;
mod mining;
mod model_io;
mod sampling;
mod tree;

pub use forest::{predict, predict_proba, train_forest, ClassProbabilities, ForestConfig, ForestModel};
pub use mining::{mine_training_set, MiningConfig, MiningOutcome, RoundReport};
pub use model_io::{load_model, save_model, MODEL_VERSION};
pub use sampling::balanced_sample;
pub use tree::{gini, Node, Tree};
