//! Scoring (confusion matrix, IoU, F1), repeated-trial statistics, the rho
//! sweep, and a synthetic scene generator used as a desk-scale benchmark.

mod metrics;
mod report;
mod sweep;
pub mod synth;
mod trials;

pub use metrics::{confusion, f1_score, f1_to_iou, ConfusionMatrix};
pub use report::{metrics_csv, metrics_table, sweep_csv, sweep_plot_data, trials_csv};
pub use sweep::{evaluate_split, rho_sweep, SplitResult, SweepRow};
pub use synth::{generate_synthetic_scene, Primitive, Recipe};
pub use trials::{repeated_trials, ClassTrialStats, TrialStats};
