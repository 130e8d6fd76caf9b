//! The ensemble proper: a model filter fusing tree outputs into the
//! class-score state and a weight filter steering the resampling weights.

use std::io::Write;

use crate::cart::{self, TreeModel, TreeParams};
use crate::dataset::{self, Dataset, Features};
use crate::error::{Error, Result};
use crate::rng;
use crate::scores::ScoreMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    /// f(x) = exp(x)
    Exponential,
    /// f(x) = x
    Linear,
}

impl Variant {
    pub fn tag(self) -> &'static str {
        match self {
            Variant::Exponential => "e",
            Variant::Linear => "l",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        match tag {
            "e" | "exp" | "exponential" => Some(Variant::Exponential),
            "l" | "lin" | "linear" => Some(Variant::Linear),
            _ => None,
        }
    }

    fn f(self, missed: bool) -> f64 {
        match (self, missed) {
            (Variant::Exponential, false) => 1.0,
            (Variant::Exponential, true) => std::f64::consts::E,
            (Variant::Linear, false) => 0.0,
            (Variant::Linear, true) => 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    /// Number of components including the seed tree.
    pub iterations: usize,
    pub tree: TreeParams,
    /// Training stops once a gain is at or below this.
    pub gain_epsilon: f64,
    pub max_resets: usize,
    pub seed: u64,
    /// Use one-hot leaf votes instead of leaf class proportions.
    pub hard_scores: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            iterations: 100,
            tree: TreeParams::default(),
            gain_epsilon: 1e-9,
            max_resets: 10,
            seed: 0,
            hard_scores: false,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.iterations < 1 {
            return Err(Error::InvalidParameter("iterations must be at least 1".into()));
        }
        if self.max_resets < 1 {
            return Err(Error::InvalidParameter("max_resets must be at least 1".into()));
        }
        if self.gain_epsilon.is_nan() || self.gain_epsilon < 0.0 {
            return Err(Error::InvalidParameter("gain_epsilon must be non-negative".into()));
        }
        self.tree.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    pub t: usize,
    pub r_y: f64,
    pub p_y: f64,
    pub k_y: f64,
    pub k_w: f64,
    pub p_w: f64,
    pub train_error: f64,
    /// Rejected measurements before this one was accepted.
    pub resets: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stage {
    pub tree: TreeModel,
    pub gain: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KfheModel {
    pub(crate) variant: Variant,
    pub(crate) hard_scores: bool,
    pub(crate) initial: TreeModel,
    pub(crate) stages: Vec<Stage>,
    pub(crate) trace: Vec<TraceRecord>,
}

#[derive(Debug, Clone)]
pub struct Fit {
    pub model: KfheModel,
    /// The model filter's final state on the training rows.
    pub estimate: ScoreMatrix,
}

pub fn kfm_time_update(estimate: &ScoreMatrix, p: f64) -> (ScoreMatrix, f64) {
    (estimate.clone(), p)
}

/// Elementwise mean of the previous estimate and the new tree's scores.
pub fn kfm_measure(prev: &ScoreMatrix, tree_scores: &ScoreMatrix) -> Result<ScoreMatrix> {
    if prev.shape() != tree_scores.shape() {
        return Err(Error::ShapeMismatch { expected: prev.shape(), found: tree_scores.shape() });
    }
    let data = prev.as_slice().iter().zip(tree_scores.as_slice()).map(|(a, b)| 0.5 * (a + b)).collect();
    Ok(ScoreMatrix::from_raw(prev.rows(), prev.cols(), data))
}

pub fn misclassified(z: &ScoreMatrix, labels: &[usize]) -> Vec<bool> {
    z.iter_rows().zip(labels).map(|(row, &l)| crate::scores::argmax(row) != l).collect()
}

pub fn measurement_error(z: &ScoreMatrix, labels: &[usize]) -> f64 {
    let miss = misclassified(z, labels);
    miss.iter().filter(|&&m| m).count() as f64 / miss.len() as f64
}

/// P/(P+R), defined as 0 when both are 0.
pub fn kalman_gain(p_prior: f64, r: f64) -> f64 {
    let s = p_prior + r;
    if s == 0.0 {
        0.0
    } else {
        p_prior / s
    }
}

pub fn kalman_combine(prior: &ScoreMatrix, z: &ScoreMatrix, k: f64) -> Result<ScoreMatrix> {
    if !(0.0..=1.0).contains(&k) {
        return Err(Error::GainOutOfRange(k));
    }
    if prior.shape() != z.shape() {
        return Err(Error::ShapeMismatch { expected: prior.shape(), found: z.shape() });
    }
    let data = prior.as_slice().iter().zip(z.as_slice()).map(|(a, b)| a + k * (b - a)).collect();
    Ok(ScoreMatrix::from_raw(prior.rows(), prior.cols(), data))
}

pub fn variance_update(p_prior: f64, k: f64) -> f64 {
    (1.0 - k) * p_prior
}

pub fn kfw_measure(weights: &[f64], missed: &[bool], variant: Variant) -> Result<Vec<f64>> {
    if weights.len() != missed.len() {
        return Err(Error::LengthMismatch { left: weights.len(), right: missed.len() });
    }
    Ok(weights.iter().zip(missed).map(|(w, &m)| w * variant.f(m)).collect())
}

/// Weight-filter measurement update followed by renormalization.
/// All-zero results fall back to uniform.
pub fn kfw_combine(prior: &[f64], z: &[f64], k: f64) -> Result<Vec<f64>> {
    if !(0.0..=1.0).contains(&k) {
        return Err(Error::GainOutOfRange(k));
    }
    if prior.len() != z.len() {
        return Err(Error::LengthMismatch { left: prior.len(), right: z.len() });
    }
    let mut w: Vec<f64> = prior.iter().zip(z).map(|(a, b)| a + k * (b - a)).collect();
    let s: f64 = w.iter().sum();
    if s > 0.0 && s.is_finite() {
        w.iter_mut().for_each(|v| *v /= s);
    } else {
        w = uniform(prior.len());
    }
    Ok(w)
}

fn uniform(n: usize) -> Vec<f64> {
    vec![1.0 / n as f64; n]
}

fn tree_scores(tree: &TreeModel, features: &Features, hard: bool) -> Result<ScoreMatrix> {
    if hard {
        tree.predict_hard(features)
    } else {
        tree.predict_scores(features)
    }
}

const SEED_STREAM: u64 = 0x6b66_6865;

pub fn train(dataset: &Dataset, config: &TrainConfig, variant: Variant) -> Result<Fit> {
    config.validate()?;
    let n = dataset.rows();
    let c = dataset.class_count();
    let labels = dataset.labels();
    let features = dataset.features();
    let reject_above = 1.0 - 1.0 / c as f64;
    let draw = |w: &[f64], t: usize, attempt: usize| -> Result<TreeModel> {
        let mut r = rng::stream(config.seed, &[SEED_STREAM, t as u64, attempt as u64]);
        let rows = dataset::resample_indices(w, &mut r)?;
        cart::fit_rows(dataset, &rows, &config.tree)
    };

    let mut w = uniform(n);
    let mut p_y = 1.0;
    let mut p_w = 1.0;
    let initial = draw(&w, 0, 0)?;
    let mut y = tree_scores(&initial, features, config.hard_scores)?;
    let mut stages = Vec::new();
    let mut trace = Vec::new();

    for t in 1..config.iterations {
        let mut resets = 0;
        let (stage, record) = loop {
            let (prior, p_prior) = kfm_time_update(&y, p_y);
            let tree = draw(&w, t, resets)?;
            let s = tree_scores(&tree, features, config.hard_scores)?;
            let z = kfm_measure(&prior, &s)?;
            let missed = misclassified(&z, labels);
            let r_y = missed.iter().filter(|&&m| m).count() as f64 / n as f64;
            if r_y > reject_above {
                if resets < config.max_resets {
                    w = uniform(n);
                    p_w = 1.0;
                    resets += 1;
                    continue;
                }
                log::warn!("iteration {t}: accepting measurement with error {r_y} after {resets} resets");
            }

            let k_y = kalman_gain(p_prior, r_y);
            y = kalman_combine(&prior, &z, k_y)?;
            p_y = variance_update(p_prior, k_y);

            let p_w_prior = p_w;
            let z_w = kfw_measure(&w, &missed, variant)?;
            let k_w = kalman_gain(p_w_prior, r_y);
            w = kfw_combine(&w, &z_w, k_w)?;
            p_w = variance_update(p_w_prior, k_w);

            let train_error = crate::metrics::misclassification_rate(labels, &y.classify())?;
            let record = TraceRecord { t, r_y, p_y, k_y, k_w, p_w, train_error, resets };
            break (Stage { tree, gain: k_y }, record);
        };
        let stop = record.k_y <= config.gain_epsilon;
        stages.push(stage);
        trace.push(record);
        if stop {
            break;
        }
    }

    let model = KfheModel { variant, hard_scores: config.hard_scores, initial, stages, trace };
    Ok(Fit { model, estimate: y })
}

impl KfheModel {
    pub fn from_parts(
        variant: Variant,
        hard_scores: bool,
        initial: TreeModel,
        stages: Vec<Stage>,
        trace: Vec<TraceRecord>,
    ) -> Result<Self> {
        for s in &stages {
            if !(0.0..=1.0).contains(&s.gain) {
                return Err(Error::GainOutOfRange(s.gain));
            }
            if s.tree.class_count() != initial.class_count() || s.tree.schema() != initial.schema() {
                return Err(Error::SchemaMismatch("component trees disagree on schema or classes".into()));
            }
        }
        Ok(Self { variant, hard_scores, initial, stages, trace })
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn hard_scores(&self) -> bool {
        self.hard_scores
    }

    pub fn initial(&self) -> &TreeModel {
        &self.initial
    }

    pub fn stages(&self) -> &[Stage] {
        &self.stages
    }

    pub fn trace(&self) -> &[TraceRecord] {
        &self.trace
    }

    pub fn class_count(&self) -> usize {
        self.initial.class_count()
    }

    /// Components including the seed tree.
    pub fn component_count(&self) -> usize {
        1 + self.stages.len()
    }

    /// Replays the model filter over the stored trees and gains.
    pub fn predict_scores(&self, features: &Features) -> Result<ScoreMatrix> {
        let mut y = tree_scores(&self.initial, features, self.hard_scores)?;
        for stage in &self.stages {
            let s = tree_scores(&stage.tree, features, self.hard_scores)?;
            let z = kfm_measure(&y, &s)?;
            y = kalman_combine(&y, &z, stage.gain)?;
        }
        Ok(y)
    }

    pub fn predict(&self, features: &Features) -> Result<Vec<usize>> {
        Ok(self.predict_scores(features)?.classify())
    }

    /// CSV with header `t,R_y,P_y,K_y,train_error`.
    pub fn write_trace<W: Write>(&self, out: W) -> Result<()> {
        write_trace(&self.trace, out)
    }
}

pub fn write_trace<W: Write>(trace: &[TraceRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "R_y", "P_y", "K_y", "train_error"])?;
    for r in trace {
        w.write_record([
            r.t.to_string(),
            r.r_y.to_string(),
            r.p_y.to_string(),
            r.k_y.to_string(),
            r.train_error.to_string(),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}
