//! Run configuration as flat `key=value` text.
//!
//! ```text
//! # scales
//! preset=outdoor        # outdoor (r0 = 0.1 m) or indoor (r0 = 0.05 m)
//! r0=0.1
//! scales=8
//! phi=2
//! rho=5
//! # forest
//! n_trees=100
//! max_depth=25          # or "none"
//! min_samples_leaf=1
//! features_per_split=auto
//! bootstrap=true
//! # training sets
//! n_per_class=1000
//! initial_per_class=1000
//! rounds=5
//! add_per_round=auto    # budget / 10
//! budget=50000
//! # classes
//! classes=1:ground,2:facade
//! ignored=0
//! seed=0
//! threads=auto
//! # file paths (input, output, labels, features, model, ...)
//! input=cloud.ply
//! ```
//!
//! Random streams derive from `seed` (see [`crate::seed`]): the forest uses
//! `derive(seed, STREAM_FOREST)`, mining `derive(seed, STREAM_MINING)` and
//! balanced sampling `derive(seed, STREAM_BALANCED)`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::classifier::{ForestConfig, MiningConfig};
use crate::cloud::{ClassCatalog, ClassId};
use crate::features::ScaleConfig;
use crate::seed::{self, STREAM_BALANCED, STREAM_FOREST, STREAM_MINING};
use crate::{Error, Result};

/// Path keys accepted in a config file.
pub const PATH_KEYS: &[&str] = &[
    "input",
    "output",
    "labels",
    "features",
    "model",
    "model_out",
    "labels_out",
    "proba_out",
    "queries",
    "csv",
    "truth",
    "pred",
    "csv_out",
    "train_cloud",
    "test_cloud",
    "plot_data",
    "recipe",
];

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub scale: ScaleConfig,
    pub n_trees: usize,
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
    pub features_per_split: Option<usize>,
    pub bootstrap: bool,
    pub n_per_class: usize,
    pub initial_per_class: usize,
    pub rounds: usize,
    pub add_per_round: Option<usize>,
    pub budget: usize,
    pub classes: Option<String>,
    pub ignored: ClassId,
    pub seed: u64,
    pub threads: Option<usize>,
    pub paths: BTreeMap<String, PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let f = ForestConfig::default();
        let m = MiningConfig::default();
        Self {
            scale: ScaleConfig::OUTDOOR,
            n_trees: f.n_trees,
            max_depth: f.max_depth,
            min_samples_leaf: f.min_samples_leaf,
            features_per_split: f.features_per_split,
            bootstrap: f.bootstrap,
            n_per_class: 1000,
            initial_per_class: m.initial_per_class,
            rounds: m.rounds,
            add_per_round: m.add_per_round,
            budget: m.budget,
            classes: None,
            ignored: 0,
            seed: 0,
            threads: None,
            paths: BTreeMap::new(),
        }
    }
}

fn parse<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::param(format!("invalid value {v:?} for {key}")))
}

fn parse_opt<T: std::str::FromStr>(key: &str, v: &str, none: &[&str]) -> Result<Option<T>> {
    if none.contains(&v) {
        Ok(None)
    } else {
        parse(key, v).map(Some)
    }
}

fn opt_str<T: ToString>(v: &Option<T>, none: &str) -> String {
    v.as_ref().map_or_else(|| none.to_string(), T::to_string)
}

impl RunConfig {
    pub fn from_text(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::param(format!("config line {}: expected key=value", i + 1)))?;
            cfg.set(k.trim(), v.trim())?;
        }
        cfg.scale.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_text(&text)
    }

    /// Applies one `key=value` setting. `preset` replaces all scale keys, so
    /// it should come before individual overrides.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.replace('-', "_");
        let v = value;
        match key.as_str() {
            "preset" => self.scale = ScaleConfig::preset(v)?,
            "r0" => self.scale.r0 = parse(&key, v)?,
            "scales" => self.scale.scales = parse(&key, v)?,
            "phi" => self.scale.phi = parse(&key, v)?,
            "rho" => self.scale.rho = parse(&key, v)?,
            "n_trees" => self.n_trees = parse(&key, v)?,
            "max_depth" => self.max_depth = parse_opt(&key, v, &["none", "unlimited", "0"])?,
            "min_samples_leaf" => self.min_samples_leaf = parse(&key, v)?,
            "features_per_split" => self.features_per_split = parse_opt(&key, v, &["auto"])?,
            "bootstrap" => self.bootstrap = parse(&key, v)?,
            "n_per_class" => self.n_per_class = parse(&key, v)?,
            "initial_per_class" => self.initial_per_class = parse(&key, v)?,
            "rounds" => self.rounds = parse(&key, v)?,
            "add_per_round" => self.add_per_round = parse_opt(&key, v, &["auto"])?,
            "budget" => self.budget = parse(&key, v)?,
            "classes" => {
                ClassCatalog::parse(v, self.ignored)?;
                self.classes = Some(v.to_string());
            }
            "ignored" => self.ignored = parse(&key, v)?,
            "seed" => self.seed = parse(&key, v)?,
            "threads" => self.threads = parse_opt(&key, v, &["auto", "0"])?,
            k if PATH_KEYS.contains(&k) => {
                self.paths.insert(k.to_string(), PathBuf::from(v));
            }
            other => return Err(Error::param(format!("unknown config key {other:?}"))),
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let s = &self.scale;
        let mut out = format!(
            "r0={}\nscales={}\nphi={}\nrho={}\nn_trees={}\nmax_depth={}\nmin_samples_leaf={}\n\
             features_per_split={}\nbootstrap={}\nn_per_class={}\ninitial_per_class={}\nrounds={}\n\
             add_per_round={}\nbudget={}\nignored={}\nseed={}\nthreads={}\n",
            s.r0,
            s.scales,
            s.phi,
            s.rho,
            self.n_trees,
            opt_str(&self.max_depth, "none"),
            self.min_samples_leaf,
            opt_str(&self.features_per_split, "auto"),
            self.bootstrap,
            self.n_per_class,
            self.initial_per_class,
            self.rounds,
            opt_str(&self.add_per_round, "auto"),
            self.budget,
            self.ignored,
            self.seed,
            opt_str(&self.threads, "auto"),
        );
        if let Some(c) = &self.classes {
            out += &format!("classes={c}\n");
        }
        for (k, p) in &self.paths {
            out += &format!("{k}={}\n", p.display());
        }
        out
    }

    pub fn path(&self, key: &str) -> Option<&Path> {
        self.paths.get(key).map(PathBuf::as_path)
    }

    pub fn forest(&self) -> ForestConfig {
        ForestConfig {
            n_trees: self.n_trees,
            max_depth: self.max_depth,
            min_samples_leaf: self.min_samples_leaf,
            features_per_split: self.features_per_split,
            bootstrap: self.bootstrap,
            seed: seed::derive(self.seed, STREAM_FOREST),
        }
    }

    pub fn mining(&self) -> MiningConfig {
        MiningConfig {
            initial_per_class: self.initial_per_class,
            rounds: self.rounds,
            add_per_round: self.add_per_round,
            budget: self.budget,
            seed: seed::derive(self.seed, STREAM_MINING),
        }
    }

    pub fn balanced_seed(&self) -> u64 {
        seed::derive(self.seed, STREAM_BALANCED)
    }

    /// The configured catalog, or one inferred from the given label sets.
    pub fn catalog<'a>(&self, labels: impl IntoIterator<Item = &'a [ClassId]>) -> Result<ClassCatalog> {
        match &self.classes {
            Some(spec) => ClassCatalog::parse(spec, self.ignored),
            None => Ok(ClassCatalog::infer(labels, self.ignored)),
        }
    }
}
