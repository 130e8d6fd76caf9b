//! Repeated stratified k-fold grid over datasets, noise levels and algorithms.

use std::time::Instant;

use anyhow::{Context, Result};
use kfhe::dataset::{inject_label_noise, stratified_kfold, FoldPlan};
use kfhe::metrics::{macro_f1, mean_sd, misclassification_rate};
use kfhe::rng::{derive_seed, name_tag};
use kfhe::Dataset;
use rayon::prelude::*;

use crate::{Algorithm, ExperimentConfig};

const FOLD_TAG: u64 = 0x666f_6c64;
const NOISE_TAG: u64 = 0x6e6f_6973;
const TRAIN_TAG: u64 = 0x7472_6e20;

#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub dataset: String,
    pub algorithm: Algorithm,
    pub noise: f64,
    pub repeat: usize,
    pub fold: usize,
    /// Against the original, noise-free test labels.
    pub macro_f1: f64,
    pub error_rate: f64,
    pub train_ms: f64,
    pub components: usize,
    pub resets: usize,
    pub gain_mismatches: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub dataset: String,
    /// Empty when the whole dataset failed to load.
    pub algorithm: String,
    pub noise: Option<f64>,
    pub repeat: Option<usize>,
    pub fold: Option<usize>,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub dataset: String,
    pub algorithm: Algorithm,
    pub noise: f64,
    pub mean_f1: f64,
    pub sd_f1: f64,
    pub count: usize,
}

#[derive(Debug, Clone, Default)]
pub struct Outcome {
    /// Names of the datasets that loaded, in config order.
    pub datasets: Vec<String>,
    pub records: Vec<Record>,
    pub failures: Vec<Failure>,
}

struct Cell<'a> {
    dataset: usize,
    algorithm: Algorithm,
    noise: usize,
    repeat: usize,
    fold: usize,
    train: &'a Dataset,
}

struct Loaded {
    name: String,
    clean: Dataset,
    plan: FoldPlan,
    /// Indexed by noise level then repeat.
    noisy: Vec<Vec<Dataset>>,
}

pub fn fold_seed(master: u64, dataset: &str) -> u64 {
    derive_seed(master, &[name_tag(dataset), FOLD_TAG])
}

pub fn noise_seed(master: u64, dataset: &str, noise: f64, repeat: usize) -> u64 {
    derive_seed(master, &[name_tag(dataset), NOISE_TAG, noise.to_bits(), repeat as u64])
}

pub fn cell_seed(master: u64, dataset: &str, noise: f64, repeat: usize, fold: usize, algorithm: Algorithm) -> u64 {
    derive_seed(
        master,
        &[name_tag(dataset), TRAIN_TAG, noise.to_bits(), repeat as u64, fold as u64, name_tag(algorithm.name())],
    )
}

fn prepare(cfg: &ExperimentConfig, name: &str, clean: Dataset) -> Result<Loaded> {
    let plan = stratified_kfold(&clean, cfg.folds, cfg.repeats, fold_seed(cfg.seed, name))?;
    let noisy = cfg
        .noise
        .iter()
        .map(|&p| {
            (0..cfg.repeats)
                .map(|r| {
                    if p == 0.0 {
                        return Ok(clean.clone());
                    }
                    Ok(inject_label_noise(&clean, p, noise_seed(cfg.seed, name, p, r))?.0)
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Loaded { name: name.to_string(), clean, plan, noisy })
}

/// Runs every cell of the grid. Dataset and cell errors are collected as
/// failures; the remaining cells still run.
pub fn run(cfg: &ExperimentConfig) -> Result<Outcome> {
    cfg.validate()?;
    let mut outcome = Outcome::default();
    let mut loaded = Vec::new();
    for spec in &cfg.datasets {
        let result = spec.load(&cfg.data_dir).and_then(|ds| prepare(cfg, spec.name(), ds));
        match result {
            Ok(l) => loaded.push(l),
            Err(e) => {
                log::warn!("skipping dataset {}: {e:#}", spec.name());
                outcome.failures.push(Failure {
                    dataset: spec.name().to_string(),
                    algorithm: String::new(),
                    noise: None,
                    repeat: None,
                    fold: None,
                    message: format!("{e:#}"),
                });
            }
        }
    }
    outcome.datasets = loaded.iter().map(|l| l.name.clone()).collect();

    let mut cells = Vec::new();
    for (d, l) in loaded.iter().enumerate() {
        for &algorithm in &cfg.algorithms {
            for noise in 0..cfg.noise.len() {
                for repeat in 0..cfg.repeats {
                    for fold in 0..cfg.folds {
                        cells.push(Cell { dataset: d, algorithm, noise, repeat, fold, train: &l.noisy[noise][repeat] });
                    }
                }
            }
        }
    }

    let pool = rayon::ThreadPoolBuilder::new().num_threads(cfg.jobs).build().context("building thread pool")?;
    let results: Vec<Result<Record, Failure>> =
        pool.install(|| cells.par_iter().map(|cell| run_cell(cfg, &loaded[cell.dataset], cell)).collect());
    for r in results {
        match r {
            Ok(rec) => outcome.records.push(rec),
            Err(f) => {
                log::warn!(
                    "cell failed: {} {} {:?} {:?} {:?}: {}",
                    f.dataset,
                    f.algorithm,
                    f.noise,
                    f.repeat,
                    f.fold,
                    f.message
                );
                outcome.failures.push(f);
            }
        }
    }
    Ok(outcome)
}

fn run_cell(cfg: &ExperimentConfig, loaded: &Loaded, cell: &Cell<'_>) -> Result<Record, Failure> {
    let noise = cfg.noise[cell.noise];
    let failure = |message: String| Failure {
        dataset: loaded.name.clone(),
        algorithm: cell.algorithm.name().to_string(),
        noise: Some(noise),
        repeat: Some(cell.repeat),
        fold: Some(cell.fold),
        message,
    };
    let (train_rows, test_rows) = loaded.plan.split(cell.repeat, cell.fold);
    let train = cell.train.subset(&train_rows);
    let test = loaded.clean.subset(&test_rows);
    let seed = cell_seed(cfg.seed, &loaded.name, noise, cell.repeat, cell.fold, cell.algorithm);
    let start = Instant::now();
    let trained =
        cell.algorithm.train(&train, cfg.iterations, &cfg.tree.params(), seed).map_err(|e| failure(e.to_string()))?;
    let train_ms = start.elapsed().as_secs_f64() * 1e3;
    let evaluate = || -> kfhe::Result<(f64, f64)> {
        let pred = trained.model.predict(test.features())?;
        Ok((macro_f1(test.labels(), &pred, test.class_count())?, misclassification_rate(test.labels(), &pred)?))
    };
    let (f1, error_rate) = evaluate().map_err(|e| failure(e.to_string()))?;
    Ok(Record {
        dataset: loaded.name.clone(),
        algorithm: cell.algorithm,
        noise,
        repeat: cell.repeat,
        fold: cell.fold,
        macro_f1: f1,
        error_rate,
        train_ms,
        components: trained.model.component_count(),
        resets: trained.resets,
        gain_mismatches: trained.gain_mismatches,
    })
}

/// Mean and sample sd of macro-F1 per (dataset, algorithm, noise), in the
/// order those keys first appear in `records`.
pub fn summarize(records: &[Record]) -> Vec<Summary> {
    let mut keys: Vec<(&str, Algorithm, u64)> = Vec::new();
    let mut values: Vec<Vec<f64>> = Vec::new();
    for r in records {
        let key = (r.dataset.as_str(), r.algorithm, r.noise.to_bits());
        let i = match keys.iter().position(|k| *k == key) {
            Some(i) => i,
            None => {
                keys.push(key);
                values.push(Vec::new());
                keys.len() - 1
            }
        };
        values[i].push(r.macro_f1);
    }
    keys.into_iter()
        .zip(values)
        .map(|((dataset, algorithm, noise), v)| {
            let (mean_f1, sd_f1) = mean_sd(&v);
            Summary {
                dataset: dataset.to_string(),
                algorithm,
                noise: f64::from_bits(noise),
                mean_f1,
                sd_f1,
                count: v.len(),
            }
        })
        .collect()
}

pub fn mean_f1(summaries: &[Summary], dataset: &str, algorithm: Algorithm, noise: f64) -> Option<f64> {
    summaries.iter().find(|s| s.dataset == dataset && s.algorithm == algorithm && s.noise == noise).map(|s| s.mean_f1)
}
