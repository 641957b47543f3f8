//! `msfeat` subcommands. Each command is a thin composition of library calls;
//! parameters come from an optional `--config` file, then `--set key=value`
//! pairs, then the dedicated flags (which mirror the config keys).

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::classifier::{balanced_sample, load_model, mine_training_set, save_model, train_forest, ClassProbabilities};
use crate::cloud::{ClassId, PointCloud};
use crate::config::RunConfig;
use crate::evaluation::{self, confusion, generate_synthetic_scene, metrics_csv, metrics_table, Recipe};
use crate::features::{extract_features, FeatureMatrix, ScalePyramid};
use crate::io::{load_cloud, load_labels, save_cloud, save_labels, CloudFormat};
use crate::spatial::{grid_subsample, GridSpec};
use crate::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "msfeat", version, about = "Multiscale point cloud features and random-forest classification")]
pub struct Cli {
    #[command(flatten)]
    pub params: ParamArgs,
    #[command(subcommand)]
    pub command: Command,
}

/// Run parameters shared by all subcommands.
#[derive(Debug, Default, Args)]
pub struct ParamArgs {
    /// key=value config file
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Extra config setting, applied after the file (repeatable)
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    pub set: Vec<String>,
    /// Scale preset: outdoor or indoor
    #[arg(long, global = true)]
    pub preset: Option<String>,
    #[arg(long, global = true)]
    pub r0: Option<String>,
    #[arg(long, global = true)]
    pub scales: Option<String>,
    #[arg(long, global = true)]
    pub phi: Option<String>,
    #[arg(long, global = true)]
    pub rho: Option<String>,
    #[arg(long, global = true)]
    pub n_trees: Option<String>,
    #[arg(long, global = true)]
    pub max_depth: Option<String>,
    #[arg(long, global = true)]
    pub min_samples_leaf: Option<String>,
    #[arg(long, global = true)]
    pub features_per_split: Option<String>,
    #[arg(long, global = true)]
    pub bootstrap: Option<String>,
    #[arg(long, global = true)]
    pub n_per_class: Option<String>,
    #[arg(long, global = true)]
    pub initial_per_class: Option<String>,
    #[arg(long, global = true)]
    pub rounds: Option<String>,
    #[arg(long, global = true)]
    pub add_per_round: Option<String>,
    #[arg(long, global = true)]
    pub budget: Option<String>,
    /// Class catalog, e.g. 1:ground,2:facade
    #[arg(long, global = true)]
    pub classes: Option<String>,
    #[arg(long, global = true)]
    pub ignored: Option<String>,
    #[arg(long, global = true)]
    pub seed: Option<String>,
    /// Worker threads (results do not depend on it)
    #[arg(long, global = true)]
    pub threads: Option<String>,
}

impl ParamArgs {
    fn overrides(&self) -> Vec<(&'static str, &str)> {
        let flags: [(&'static str, &Option<String>); 19] = [
            ("preset", &self.preset),
            ("r0", &self.r0),
            ("scales", &self.scales),
            ("phi", &self.phi),
            ("rho", &self.rho),
            ("n_trees", &self.n_trees),
            ("max_depth", &self.max_depth),
            ("min_samples_leaf", &self.min_samples_leaf),
            ("features_per_split", &self.features_per_split),
            ("bootstrap", &self.bootstrap),
            ("n_per_class", &self.n_per_class),
            ("initial_per_class", &self.initial_per_class),
            ("rounds", &self.rounds),
            ("add_per_round", &self.add_per_round),
            ("budget", &self.budget),
            ("ignored", &self.ignored),
            ("classes", &self.classes),
            ("seed", &self.seed),
            ("threads", &self.threads),
        ];
        flags
            .into_iter()
            .filter_map(|(k, v)| v.as_deref().map(|v| (k, v)))
            .collect()
    }

    /// File, then `--set` pairs, then dedicated flags.
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        for kv in &self.set {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::Param(format!("--set expects KEY=VALUE, got {kv:?}")))?;
            cfg.set(k.trim(), v.trim())?;
        }
        for (k, v) in self.overrides() {
            cfg.set(k, v)?;
        }
        cfg.scale.validate()?;
        Ok(cfg)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Strategy {
    Balanced,
    Mine,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Voxel-grid subsampling (barycenter per cell)
    Subsample {
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long)]
        cell_size: f64,
    },
    /// Multiscale feature extraction
    Features {
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        output: Option<PathBuf>,
        /// File of point indices (one per line) to restrict the queries
        #[arg(long)]
        queries: Option<PathBuf>,
        /// Also write the matrix as CSV
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Train a random forest on a feature matrix and per-row labels
    Train {
        #[arg(long)]
        features: Option<PathBuf>,
        #[arg(long)]
        labels: Option<PathBuf>,
        #[arg(long)]
        model_out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "balanced")]
        strategy: Strategy,
    },
    /// Predict labels from a feature matrix or a raw cloud
    Predict {
        #[arg(long, conflicts_with = "input")]
        features: Option<PathBuf>,
        /// Raw cloud; features are extracted with the model's scale settings
        #[arg(long = "cloud")]
        input: Option<PathBuf>,
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        labels_out: Option<PathBuf>,
        /// Per-class probabilities as CSV
        #[arg(long)]
        proba_out: Option<PathBuf>,
    },
    /// Confusion-matrix metrics of predicted against reference labels
    Evaluate {
        #[arg(long)]
        truth: Option<PathBuf>,
        #[arg(long)]
        pred: Option<PathBuf>,
        #[arg(long)]
        csv_out: Option<PathBuf>,
    },
    /// Mean IoU and throughput for a list of rho values
    SweepRho {
        #[arg(long)]
        train_cloud: Option<PathBuf>,
        #[arg(long)]
        test_cloud: Option<PathBuf>,
        #[arg(long, value_delimiter = ',', required = true)]
        rhos: Vec<f64>,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long)]
        plot_data: Option<PathBuf>,
    },
    /// Generate a labeled synthetic scene
    Synth {
        /// Built-in recipe name (street-v1) or TOML recipe path
        #[arg(long)]
        recipe: Option<String>,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long)]
        labels_out: Option<PathBuf>,
    },
}

fn path(cfg: &RunConfig, flag: Option<PathBuf>, key: &str) -> Result<PathBuf> {
    flag.or_else(|| cfg.path(key).map(Path::to_path_buf))
        .ok_or_else(|| Error::Param(format!("missing --{} (or {key}= in the config)", key.replace('_', "-"))))
}

fn opt_path(cfg: &RunConfig, flag: Option<PathBuf>, key: &str) -> Option<PathBuf> {
    flag.or_else(|| cfg.path(key).map(Path::to_path_buf))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn read_cloud(path: &Path) -> Result<PointCloud<f64>> {
    load_cloud(path, CloudFormat::from_path(path))
}

fn read_indices(path: &Path) -> Result<Vec<usize>> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            l.trim().parse().map_err(|_| Error::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                msg: format!("expected a point index, got {:?}", l.trim()),
            })
        })
        .collect()
}

fn histogram(labels: &[ClassId]) -> BTreeMap<ClassId, usize> {
    let mut h = BTreeMap::new();
    for &l in labels {
        *h.entry(l).or_insert(0) += 1;
    }
    h
}

/// CSV of per-class probabilities, header `class_<id>`.
pub fn proba_csv(p: &ClassProbabilities) -> String {
    let mut out = p
        .classes
        .iter()
        .map(|c| format!("class_{c}"))
        .collect::<Vec<_>>()
        .join(",");
    out.push('\n');
    for i in 0..p.rows() {
        let row: Vec<String> = p.row(i).iter().map(|v| v.to_string()).collect();
        out += &row.join(",");
        out.push('\n');
    }
    out
}

/// Features of every point (or of `queries`) of `cloud`.
pub fn cloud_features(
    cloud: &PointCloud<f64>,
    scale: &crate::ScaleConfig,
    queries: Option<&[usize]>,
) -> Result<(ScalePyramid<f64>, FeatureMatrix<f64>)> {
    let pyramid = ScalePyramid::build(cloud, scale)?;
    let all: Vec<usize>;
    let q = match queries {
        Some(q) => q,
        None => {
            all = (0..cloud.len()).collect();
            &all
        }
    };
    let x = extract_features(cloud, &pyramid, q)?;
    Ok((pyramid, x))
}

fn init_threads(cfg: &RunConfig) {
    if let Some(n) = cfg.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            log::warn!("could not configure {n} worker threads: {e}");
        }
    }
}

pub fn run(cli: Cli) -> Result<()> {
    let cfg = cli.params.resolve()?;
    init_threads(&cfg);
    match cli.command {
        Command::Subsample {
            input,
            output,
            cell_size,
        } => {
            let input = path(&cfg, input, "input")?;
            let output = path(&cfg, output, "output")?;
            let cloud = read_cloud(&input)?;
            let grid = GridSpec::anchored(&cloud, cell_size)?;
            let sub = grid_subsample(&cloud, &grid);
            save_cloud(&sub, &output, CloudFormat::from_path(&output))?;
            println!("input points: {}", cloud.len());
            println!("output points: {}", sub.len());
        }
        Command::Features {
            input,
            output,
            queries,
            csv,
        } => {
            let input = path(&cfg, input, "input")?;
            let output = path(&cfg, output, "output")?;
            let cloud = read_cloud(&input)?;
            let queries = opt_path(&cfg, queries, "queries").map(|p| read_indices(&p)).transpose()?;
            let start = Instant::now();
            let (pyramid, x) = cloud_features(&cloud, &cfg.scale, queries.as_deref())?;
            let secs = start.elapsed().as_secs_f64();
            for (s, level) in pyramid.scales().iter().enumerate() {
                log::info!("scale {s}: radius {} m, {} support points", level.radius, level.cloud.len());
            }
            log::info!("{} rows in {secs:.2} s ({:.0} points/s)", x.rows(), x.rows() as f64 / secs.max(1e-9));
            x.save(&output)?;
            if let Some(csv) = opt_path(&cfg, csv, "csv") {
                x.save_csv(&csv)?;
            }
            println!("{} rows x {} columns", x.rows(), x.cols());
        }
        Command::Train {
            features,
            labels,
            model_out,
            strategy,
        } => {
            let x = FeatureMatrix::load(&path(&cfg, features, "features")?)?;
            let labels = load_labels(&path(&cfg, labels, "labels")?)?;
            let model_out = path(&cfg, model_out, "model_out")?;
            if labels.len() != x.rows() {
                return Err(Error::Param(format!(
                    "{} feature rows but {} labels",
                    x.rows(),
                    labels.len()
                )));
            }
            let hist = histogram(&labels);
            for (c, n) in &hist {
                log::info!("class {c}: {n} points");
            }
            let model = match strategy {
                Strategy::Balanced => {
                    for (c, &n) in hist.iter().filter(|(&c, _)| c != cfg.ignored) {
                        if n < cfg.n_per_class {
                            log::warn!("class {c} has {n} points, fewer than n_per_class = {}; using all", cfg.n_per_class);
                        }
                    }
                    let idx = balanced_sample(&labels, cfg.n_per_class, cfg.ignored, cfg.balanced_seed())?;
                    let y: Vec<ClassId> = idx.iter().map(|&i| labels[i]).collect();
                    log::info!("training set: {} points", idx.len());
                    train_forest(&x.select_rows(&idx), &y, &cfg.forest())?
                }
                Strategy::Mine => {
                    let out = mine_training_set(&x, &labels, cfg.ignored, &cfg.forest(), &cfg.mining())?;
                    for (i, r) in out.rounds.iter().enumerate() {
                        log::info!(
                            "round {i}: |T| = {}, errors = {}, added = {}, errors per class = {:?}",
                            r.training_size,
                            r.errors,
                            r.added,
                            r.errors_per_class
                        );
                    }
                    let sel: Vec<ClassId> = out.selected.iter().map(|&i| labels[i]).collect();
                    log::info!("final training set: {:?}", histogram(&sel));
                    out.model
                }
            };
            save_model(&model, &model_out)?;
            println!("{} trees, {} classes", model.trees.len(), model.classes.len());
        }
        Command::Predict {
            features,
            input,
            model,
            labels_out,
            proba_out,
        } => {
            let model = load_model(&path(&cfg, model, "model")?)?;
            let labels_out = path(&cfg, labels_out, "labels_out")?;
            let x = match (opt_path(&cfg, features, "features"), input) {
                (Some(f), None) => FeatureMatrix::load(&f)?,
                (_, Some(c)) => {
                    let scale = model.layout.config.ok_or_else(|| {
                        Error::Model("model carries no scale settings; pass --features instead".into())
                    })?;
                    cloud_features(&read_cloud(&c)?, &scale, None)?.1
                }
                (None, None) => return Err(Error::Param("missing --features or --cloud".into())),
            };
            let proba = model.predict_proba(&x)?;
            let pred = proba.argmax();
            save_labels(&pred, &labels_out)?;
            if let Some(p) = opt_path(&cfg, proba_out, "proba_out") {
                write_text(&p, &proba_csv(&proba))?;
            }
            println!("{} points labeled", pred.len());
        }
        Command::Evaluate { truth, pred, csv_out } => {
            let truth = load_labels(&path(&cfg, truth, "truth")?)?;
            let pred = load_labels(&path(&cfg, pred, "pred")?)?;
            let catalog = cfg.catalog([truth.as_slice(), pred.as_slice()])?;
            let cm = confusion(&truth, &pred, &catalog)?;
            if let Some(p) = opt_path(&cfg, csv_out, "csv_out") {
                write_text(&p, &metrics_csv(&cm, &catalog))?;
            }
            print!("{}", metrics_table(&cm, &catalog));
        }
        Command::SweepRho {
            train_cloud,
            test_cloud,
            rhos,
            output,
            plot_data,
        } => {
            let train = read_cloud(&path(&cfg, train_cloud, "train_cloud")?)?;
            let test = read_cloud(&path(&cfg, test_cloud, "test_cloud")?)?;
            let output = path(&cfg, output, "output")?;
            let label_sets = [train.labels(), test.labels()];
            let catalog = cfg.catalog(label_sets.into_iter().flatten())?;
            let rows = evaluation::rho_sweep(
                &train,
                &test,
                &rhos,
                &cfg.scale,
                &cfg.forest(),
                cfg.n_per_class,
                &catalog,
                cfg.seed,
            )?;
            let csv = evaluation::sweep_csv(&rows);
            write_text(&output, &csv)?;
            if let Some(p) = opt_path(&cfg, plot_data, "plot_data") {
                write_text(&p, &evaluation::sweep_plot_data(&rows))?;
            }
            print!("{csv}");
        }
        Command::Synth {
            recipe,
            output,
            labels_out,
        } => {
            let recipe = recipe
                .or_else(|| cfg.path("recipe").map(|p| p.display().to_string()))
                .unwrap_or_else(|| "street-v1".to_string());
            let recipe = Recipe::resolve(&recipe)?;
            let output = path(&cfg, output, "output")?;
            let scene = generate_synthetic_scene(&recipe, cfg.seed)?;
            save_cloud(&scene, &output, CloudFormat::from_path(&output))?;
            if let Some(p) = opt_path(&cfg, labels_out, "labels_out") {
                let labels = scene.labels().ok_or_else(|| Error::Validation("scene has no labels".into()))?;
                save_labels(labels, &p)?;
            }
            println!("{} points", scene.len());
        }
    }
    Ok(())
}
