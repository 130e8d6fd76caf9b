//! Experiment configuration, read from TOML and overridable from the command line.
//!
//! ```toml
//! seed = 1
//! iterations = 100
//! repeats = 20
//! folds = 4
//! noise = [0.0, 0.05, 0.10, 0.15, 0.20]
//! algorithms = ["kfhe-e", "kfhe-l", "adaboost", "bagging", "cart"]
//! data_dir = "data"
//! datasets = ["iris", "glass", { name = "wine", path = "/tmp/wine.csv", label = "cultivar" }]
//! out = "results"
//! jobs = 0            # 0 uses every core
//!
//! [tree]
//! max_depth = 30      # 0 means unlimited
//! min_split = 20
//! min_leaf = 7
//! min_impurity_decrease = 0.01
//! ```

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use kfhe::dataset::{load_csv, CsvOptions, LabelColumn};
use kfhe::{Dataset, TreeParams};
use serde::Deserialize;

use crate::Algorithm;

pub const BUNDLED: [&str; 10] =
    ["iris", "glass", "sonar", "monks", "haberman", "hayes_roth", "newthyroid", "zoo", "bupa", "vertebral"];

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum DatasetSpec {
    Name(String),
    File {
        name: String,
        path: PathBuf,
        #[serde(default)]
        label: Option<String>,
    },
}

impl DatasetSpec {
    pub fn name(&self) -> &str {
        match self {
            DatasetSpec::Name(n) => n,
            DatasetSpec::File { name, .. } => name,
        }
    }

    /// Bare names resolve to `<data_dir>/<name>.csv` with the label last.
    pub fn load(&self, data_dir: &Path) -> Result<Dataset> {
        let (path, label) = match self {
            DatasetSpec::Name(n) => (data_dir.join(format!("{n}.csv")), None),
            DatasetSpec::File { path, label, .. } => (path.clone(), label.clone()),
        };
        let options = CsvOptions { label: label.map_or(LabelColumn::Last, LabelColumn::Name), ..Default::default() };
        load_csv(&path, &options).with_context(|| format!("loading dataset {:?}", self.name()))
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TreeSection {
    pub max_depth: usize,
    pub min_split: usize,
    pub min_leaf: usize,
    pub min_impurity_decrease: f64,
}

impl Default for TreeSection {
    fn default() -> Self {
        let p = TreeParams::default();
        Self {
            max_depth: p.max_depth.unwrap_or(0),
            min_split: p.min_split,
            min_leaf: p.min_leaf,
            min_impurity_decrease: p.min_impurity_decrease,
        }
    }
}

impl TreeSection {
    pub fn params(&self) -> TreeParams {
        TreeParams {
            max_depth: (self.max_depth > 0).then_some(self.max_depth),
            min_split: self.min_split,
            min_leaf: self.min_leaf,
            min_impurity_decrease: self.min_impurity_decrease,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub iterations: usize,
    pub repeats: usize,
    pub folds: usize,
    pub noise: Vec<f64>,
    pub algorithms: Vec<Algorithm>,
    pub data_dir: PathBuf,
    pub datasets: Vec<DatasetSpec>,
    pub out: PathBuf,
    pub jobs: usize,
    pub tree: TreeSection,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            iterations: 100,
            repeats: 20,
            folds: 4,
            noise: vec![0.0, 0.05, 0.10, 0.15, 0.20],
            algorithms: Algorithm::ALL.to_vec(),
            data_dir: PathBuf::from("data"),
            datasets: BUNDLED.iter().map(|n| DatasetSpec::Name(n.to_string())).collect(),
            out: PathBuf::from("results"),
            jobs: 0,
            tree: TreeSection::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).context("parsing experiment config")?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.iterations < 1 {
            bail!("iterations must be at least 1");
        }
        if self.repeats < 1 {
            bail!("repeats must be at least 1");
        }
        if self.folds < 2 {
            bail!("folds must be at least 2");
        }
        if self.noise.is_empty() || self.noise.iter().any(|p| !(0.0..=1.0).contains(p)) {
            bail!("noise levels must be a non-empty list of values in [0, 1]");
        }
        if self.algorithms.is_empty() {
            bail!("at least one algorithm is required");
        }
        for (i, a) in self.algorithms.iter().enumerate() {
            if self.algorithms[..i].contains(a) {
                bail!("algorithm {a} listed twice");
            }
        }
        for (i, p) in self.noise.iter().enumerate() {
            if self.noise[..i].contains(p) {
                bail!("noise level {p} listed twice");
            }
        }
        if self.datasets.is_empty() {
            bail!("at least one dataset is required");
        }
        for (i, d) in self.datasets.iter().enumerate() {
            if self.datasets[..i].iter().any(|o| o.name() == d.name()) {
                bail!("dataset {:?} listed twice", d.name());
            }
        }
        self.tree.params().validate()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        ExperimentConfig::default().validate().unwrap();
        assert_eq!(ExperimentConfig::from_toml("").unwrap(), ExperimentConfig::default());
    }

    #[test]
    fn parses_the_documented_keys() {
        let cfg = ExperimentConfig::from_toml(
            r#"
            seed = 9
            noise = [0.0, 0.2]
            algorithms = ["kfhe-l", "cart"]
            datasets = ["iris", { name = "w", path = "/x/w.csv", label = "k" }]
            [tree]
            max_depth = 0
            "#,
        )
        .unwrap();
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.algorithms, vec![Algorithm::KfheL, Algorithm::Cart]);
        assert_eq!(cfg.datasets[1].name(), "w");
        assert_eq!(cfg.tree.params().max_depth, None);
        assert_eq!(cfg.repeats, 20);
    }

    #[test]
    fn rejects_bad_values() {
        for text in [
            "noise = [1.5]",
            "folds = 1",
            "algorithms = []",
            "algorithms = [\"gbm\"]",
            "bogus = 1",
            "[tree]\nmin_leaf = 0",
            "datasets = [\"a\", \"a\"]",
        ] {
            assert!(ExperimentConfig::from_toml(text).is_err(), "{text}");
        }
    }
}
