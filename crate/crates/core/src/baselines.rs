//! Reference learners: bootstrap aggregation and SAMME boosting.

use crate::cart::{self, TreeModel, TreeParams};
use std::sync::Arc;

use crate::dataset::{self, Dataset, Features, Schema};
use crate::error::{Error, Result};
use crate::rng;
use crate::scores::{argmax, ScoreMatrix};

const BAG_STREAM: u64 = 0x6261_6767;
const SAMME_STREAM: u64 = 0x7361_6d6d;

#[derive(Debug, Clone, PartialEq)]
pub struct BaggingModel {
    pub(crate) trees: Vec<TreeModel>,
}

impl BaggingModel {
    pub fn from_trees(trees: Vec<TreeModel>) -> Result<Self> {
        check_members(trees.iter())?;
        Ok(Self { trees })
    }

    pub fn trees(&self) -> &[TreeModel] {
        &self.trees
    }

    pub fn class_count(&self) -> usize {
        self.trees[0].class_count()
    }

    /// Mean of the member trees' score rows.
    pub fn predict_scores(&self, features: &Features) -> Result<ScoreMatrix> {
        let c = self.class_count();
        let mut acc = vec![0.0; features.rows() * c];
        for t in &self.trees {
            let s = t.predict_scores(features)?;
            acc.iter_mut().zip(s.as_slice()).for_each(|(a, b)| *a += b);
        }
        let k = self.trees.len() as f64;
        acc.iter_mut().for_each(|a| *a /= k);
        Ok(ScoreMatrix::from_raw(features.rows(), c, acc))
    }

    pub fn predict(&self, features: &Features) -> Result<Vec<usize>> {
        Ok(self.predict_scores(features)?.classify())
    }
}

fn check_members<'a>(mut trees: impl Iterator<Item = &'a TreeModel>) -> Result<()> {
    let first = trees.next().ok_or(Error::EmptyModel)?;
    for t in trees {
        if t.class_count() != first.class_count() || t.schema() != first.schema() {
            return Err(Error::SchemaMismatch("member trees disagree on schema or classes".into()));
        }
    }
    Ok(())
}

pub fn bagging_train(dataset: &Dataset, rounds: usize, params: &TreeParams, seed: u64) -> Result<BaggingModel> {
    if rounds < 1 {
        return Err(Error::InvalidParameter("bagging needs at least one tree".into()));
    }
    let w = vec![1.0; dataset.rows()];
    let trees = (0..rounds)
        .map(|t| {
            let rows = dataset::resample_indices(&w, &mut rng::stream(seed, &[BAG_STREAM, t as u64]))?;
            cart::fit_rows(dataset, &rows, params)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BaggingModel { trees })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SammeModel {
    pub(crate) stages: Vec<(TreeModel, f64)>,
    pub(crate) class_count: usize,
    pub(crate) schema: Arc<Schema>,
}

/// ln((1-err)/err) + ln(c-1), capped at ln(1e12·(c-1)).
pub fn samme_alpha(err: f64, class_count: usize) -> f64 {
    let k = (class_count - 1) as f64;
    let cap = (1e12 * k).ln();
    if err <= 0.0 {
        return cap;
    }
    (((1.0 - err) / err).ln() + k.ln()).min(cap)
}

/// Slots whose weighted error reaches 1 - 1/c store nothing, reset the
/// weights and still count toward `rounds`.
pub fn samme_train(dataset: &Dataset, rounds: usize, params: &TreeParams, seed: u64) -> Result<SammeModel> {
    if rounds < 1 {
        return Err(Error::InvalidParameter("boosting needs at least one round".into()));
    }
    let n = dataset.rows();
    let c = dataset.class_count();
    let labels = dataset.labels();
    let reject_at = 1.0 - 1.0 / c as f64;
    let uniform = vec![1.0 / n as f64; n];
    let mut w = uniform.clone();
    let mut stages = Vec::new();
    for t in 0..rounds {
        let rows = dataset::resample_indices(&w, &mut rng::stream(seed, &[SAMME_STREAM, t as u64]))?;
        let tree = cart::fit_rows(dataset, &rows, params)?;
        let pred = tree.predict(dataset.features())?;
        let missed: Vec<bool> = pred.iter().zip(labels).map(|(p, l)| p != l).collect();
        let err: f64 = w.iter().zip(&missed).filter(|(_, &m)| m).map(|(w, _)| w).sum();
        if err >= reject_at {
            w.clone_from(&uniform);
            continue;
        }
        let alpha = samme_alpha(err, c);
        stages.push((tree, alpha));
        if err <= 0.0 {
            break;
        }
        let boost = alpha.exp();
        for (wi, &m) in w.iter_mut().zip(&missed) {
            if m {
                *wi *= boost;
            }
        }
        let s: f64 = w.iter().sum();
        w.iter_mut().for_each(|v| *v /= s);
    }
    Ok(SammeModel { stages, class_count: c, schema: Arc::clone(dataset.schema()) })
}

impl SammeModel {
    pub fn from_stages(stages: Vec<(TreeModel, f64)>, class_count: usize, schema: Arc<Schema>) -> Result<Self> {
        if class_count < 2 {
            return Err(Error::TooFewLabels(class_count));
        }
        if stages.iter().any(|(t, a)| t.class_count() != class_count || !a.is_finite() || *t.schema() != schema) {
            return Err(Error::InvalidParameter("stage schema, class count or weight is invalid".into()));
        }
        Ok(Self { stages, class_count, schema })
    }

    pub fn schema(&self) -> &Arc<Schema> {
        &self.schema
    }

    pub fn stages(&self) -> &[(TreeModel, f64)] {
        &self.stages
    }

    pub fn class_count(&self) -> usize {
        self.class_count
    }

    /// Weighted votes of each stage's argmax, normalized per row. Rows with no
    /// vote mass are uniform.
    pub fn predict_scores(&self, features: &Features) -> Result<ScoreMatrix> {
        if !features.schema_matches(&self.schema) {
            return Err(Error::SchemaMismatch("features were not built with the model's training schema".into()));
        }
        let c = self.class_count;
        let n = features.rows();
        let mut acc = vec![0.0; n * c];
        for (tree, alpha) in &self.stages {
            let s = tree.predict_scores(features)?;
            for (i, row) in s.iter_rows().enumerate() {
                acc[i * c + argmax(row)] += alpha;
            }
        }
        for row in acc.chunks_exact_mut(c) {
            let s: f64 = row.iter().sum();
            if s > 0.0 {
                row.iter_mut().for_each(|v| *v /= s);
            } else {
                row.iter_mut().for_each(|v| *v = 1.0 / c as f64);
            }
        }
        Ok(ScoreMatrix::from_raw(n, c, acc))
    }

    pub fn predict(&self, features: &Features) -> Result<Vec<usize>> {
        Ok(self.predict_scores(features)?.classify())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cart::{fit_tree, Node, SplitRule};
    use crate::dataset::{Column, FeatureKind, FeatureSpec};

    fn line() -> Dataset {
        let schema = Arc::new(Schema {
            features: vec![FeatureSpec { name: "x".into(), kind: FeatureKind::Numeric }],
            label_name: "y".into(),
        });
        let xs: Vec<f64> = (0..40).map(|i| i as f64).collect();
        let ys = xs.iter().map(|&x| usize::from(x >= 20.0)).collect();
        Dataset::new(Features::new(schema, vec![Column::Numeric(xs)]).unwrap(), ys, vec!["a".into(), "b".into()])
            .unwrap()
    }

    fn constant_tree(ds: &Dataset, class: usize) -> TreeModel {
        let mut scores = vec![0.0; ds.class_count()];
        scores[class] = 1.0;
        TreeModel::from_parts(vec![Node::Leaf { scores }], ds.class_count(), Arc::clone(ds.schema())).unwrap()
    }

    #[test]
    fn alpha_examples() {
        assert_eq!(samme_alpha(0.5, 2), 0.0);
        assert!((samme_alpha(0.25, 3) - (3f64.ln() + 2f64.ln())).abs() < 1e-12);
        assert!((samme_alpha(0.0, 3) - (2e12f64).ln()).abs() < 1e-12);
        assert!(samme_alpha(1e-300, 2) <= (1e12f64).ln());
    }

    #[test]
    fn bagging_votes_softly() {
        let ds = line();
        let bag = BaggingModel::from_trees(vec![constant_tree(&ds, 0), constant_tree(&ds, 1)]).unwrap();
        let s = bag.predict_scores(ds.features()).unwrap();
        assert!(s.iter_rows().all(|r| r == [0.5, 0.5]));
        let single = fit_tree(&ds, &TreeParams::default()).unwrap();
        let twice = BaggingModel::from_trees(vec![single.clone(), single.clone()]).unwrap();
        assert_eq!(twice.predict_scores(ds.features()).unwrap(), single.predict_scores(ds.features()).unwrap());
        assert!(BaggingModel::from_trees(vec![]).is_err());
    }

    #[test]
    fn bagging_is_seeded() {
        let ds = line();
        let a = bagging_train(&ds, 3, &TreeParams::default(), 4).unwrap();
        assert_eq!(a, bagging_train(&ds, 3, &TreeParams::default(), 4).unwrap());
        assert_eq!(a.trees().len(), 3);
        let one = bagging_train(&ds, 1, &TreeParams::default(), 4).unwrap();
        assert_eq!(one.predict_scores(ds.features()).unwrap(), one.trees()[0].predict_scores(ds.features()).unwrap());
    }

    #[test]
    fn samme_vote_rules() {
        let ds = line();
        let one = SammeModel::from_stages(vec![(constant_tree(&ds, 1), 1.0)], 2, Arc::clone(ds.schema())).unwrap();
        assert!(one.predict_scores(ds.features()).unwrap().iter_rows().all(|r| r == [0.0, 1.0]));
        let tie = SammeModel::from_stages(
            vec![(constant_tree(&ds, 1), 0.7), (constant_tree(&ds, 0), 0.7)],
            2,
            Arc::clone(ds.schema()),
        )
        .unwrap();
        assert!(tie.predict(ds.features()).unwrap().iter().all(|&p| p == 0));
        let zero = SammeModel::from_stages(vec![(constant_tree(&ds, 1), 0.0)], 2, Arc::clone(ds.schema())).unwrap();
        assert!(zero.predict_scores(ds.features()).unwrap().iter_rows().all(|r| r == [0.5, 0.5]));
    }

    #[test]
    fn samme_stops_after_perfect_stage() {
        let ds = line();
        let m = samme_train(&ds, 10, &TreeParams::default(), 1).unwrap();
        let (tree, alpha) = m.stages().last().unwrap();
        assert!(m.stages().len() < 10);
        assert_eq!(tree.predict(ds.features()).unwrap(), ds.labels());
        assert!((alpha - 1e12f64.ln()).abs() < 1e-9);
        assert!(matches!(tree.nodes()[0], Node::Split { rule: SplitRule::Threshold(_), .. }));
    }
}
