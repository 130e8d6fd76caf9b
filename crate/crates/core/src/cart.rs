//! CART classification trees grown greedily on Gini impurity.
//!
//! Every fit presorts each numeric feature once and then keeps the per-node
//! slices partitioned, so a split scan is linear in the node size.

use std::sync::Arc;

use crate::dataset::{Column, Dataset, FeatureKind, Features, Schema, UNSEEN};
use crate::error::{Error, Result};
use crate::scores::ScoreMatrix;

const TIE_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TreeParams {
    /// `None` grows until another stopping rule applies.
    pub max_depth: Option<usize>,
    pub min_split: usize,
    pub min_leaf: usize,
    pub min_impurity_decrease: f64,
}

impl Default for TreeParams {
    fn default() -> Self {
        Self { max_depth: Some(30), min_split: 20, min_leaf: 7, min_impurity_decrease: 0.01 }
    }
}

impl TreeParams {
    pub fn validate(&self) -> Result<()> {
        if self.max_depth == Some(0) {
            return Err(Error::InvalidParameter("max_depth must be positive".into()));
        }
        if self.min_leaf < 1 {
            return Err(Error::InvalidParameter("min_leaf must be at least 1".into()));
        }
        if self.min_split < 2 * self.min_leaf {
            return Err(Error::InvalidParameter(format!(
                "min_split ({}) must be at least twice min_leaf ({})",
                self.min_split, self.min_leaf
            )));
        }
        if !(self.min_impurity_decrease >= 0.0 && self.min_impurity_decrease.is_finite()) {
            return Err(Error::InvalidParameter("min_impurity_decrease must be a non-negative number".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SplitRule {
    /// Rows with `x <= threshold` go left.
    Threshold(f64),
    /// Indexed by level code; `true` goes left.
    LeftLevels(Vec<bool>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Leaf {
        scores: Vec<f64>,
    },
    Split {
        feature: usize,
        rule: SplitRule,
        left: usize,
        right: usize,
        /// Training rows that went each way; unseen levels follow the heavier side.
        left_mass: usize,
        right_mass: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TreeModel {
    nodes: Vec<Node>,
    class_count: usize,
    schema: Arc<Schema>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Split {
    pub feature: usize,
    pub rule: SplitRule,
    pub decrease: f64,
}

pub fn gini(counts: &[usize]) -> Result<f64> {
    let total: usize = counts.iter().sum();
    if total == 0 {
        return Err(Error::InvalidParameter("gini of an empty count vector".into()));
    }
    let t = total as f64;
    Ok(1.0 - counts.iter().map(|&k| (k as f64 / t).powi(2)).sum::<f64>())
}

pub fn fit_tree(dataset: &Dataset, params: &TreeParams) -> Result<TreeModel> {
    let rows: Vec<usize> = (0..dataset.rows()).collect();
    fit_rows(dataset, &rows, params)
}

/// Same as fitting on `dataset.subset(rows)`, without materializing the copy.
pub fn fit_rows(dataset: &Dataset, rows: &[usize], params: &TreeParams) -> Result<TreeModel> {
    params.validate()?;
    if rows.is_empty() {
        return Err(Error::EmptyDataset);
    }
    Ok(Grower::new(dataset, rows, params).grow())
}

/// Best split of the given rows treated as a root node.
pub fn best_split(dataset: &Dataset, rows: &[usize], params: &TreeParams) -> Result<Option<Split>> {
    params.validate()?;
    if rows.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut g = Grower::new(dataset, rows, params);
    let m = rows.len();
    let counts = g.counts(0, m);
    Ok(g.find_split(0, m, &counts).map(|(s, _)| s))
}

enum Candidate {
    Threshold(f64),
    Single(u32),
    Prefix(usize),
}

struct Grower<'a> {
    params: &'a TreeParams,
    schema: Arc<Schema>,
    c: usize,
    total: f64,
    y: Vec<u32>,
    numeric: Vec<Option<Vec<f64>>>,
    codes: Vec<Option<(Vec<u32>, usize)>>,
    sorted: Vec<Vec<u32>>,
    members: Vec<u32>,
    goes_left: Vec<bool>,
    scratch: Vec<u32>,
}

impl<'a> Grower<'a> {
    fn new(ds: &Dataset, rows: &[usize], params: &'a TreeParams) -> Self {
        let m = rows.len();
        let f = ds.features();
        let mut numeric = Vec::with_capacity(f.width());
        let mut codes = Vec::with_capacity(f.width());
        let mut sorted = Vec::with_capacity(f.width());
        for (j, spec) in f.schema().features.iter().enumerate() {
            match (f.column(j), &spec.kind) {
                (Column::Numeric(v), _) => {
                    let xs: Vec<f64> = rows.iter().map(|&r| v[r]).collect();
                    let mut order: Vec<u32> = (0..m as u32).collect();
                    order.sort_by(|&a, &b| xs[a as usize].total_cmp(&xs[b as usize]));
                    numeric.push(Some(xs));
                    codes.push(None);
                    sorted.push(order);
                }
                (Column::Categorical(v), FeatureKind::Categorical { levels }) => {
                    numeric.push(None);
                    codes.push(Some((rows.iter().map(|&r| v[r]).collect(), levels.len())));
                    sorted.push(Vec::new());
                }
                _ => unreachable!("features are validated against their schema"),
            }
        }
        Self {
            params,
            schema: Arc::clone(f.schema()),
            c: ds.class_count(),
            total: m as f64,
            y: rows.iter().map(|&r| ds.labels()[r] as u32).collect(),
            numeric,
            codes,
            sorted,
            members: (0..m as u32).collect(),
            goes_left: vec![false; m],
            scratch: Vec::with_capacity(m),
        }
    }

    fn counts(&self, lo: usize, hi: usize) -> Vec<usize> {
        let mut counts = vec![0; self.c];
        for &p in &self.members[lo..hi] {
            counts[self.y[p as usize] as usize] += 1;
        }
        counts
    }

    fn grow(mut self) -> TreeModel {
        let m = self.members.len();
        let mut nodes = vec![Node::Leaf { scores: Vec::new() }];
        let mut stack = vec![(0usize, 0usize, m, 0usize)];
        while let Some((id, lo, hi, depth)) = stack.pop() {
            let counts = self.counts(lo, hi);
            let n = hi - lo;
            let splittable = n >= self.params.min_split
                && self.params.max_depth.map_or(true, |d| depth < d)
                && counts.iter().filter(|&&k| k > 0).count() > 1;
            let found = if splittable { self.find_split(lo, hi, &counts) } else { None };
            match found {
                None => {
                    let scores = counts.iter().map(|&k| k as f64 / n as f64).collect();
                    nodes[id] = Node::Leaf { scores };
                }
                Some((split, n_left)) => {
                    self.partition(lo, hi, n_left);
                    let (left, right) = (nodes.len(), nodes.len() + 1);
                    nodes.push(Node::Leaf { scores: Vec::new() });
                    nodes.push(Node::Leaf { scores: Vec::new() });
                    nodes[id] = Node::Split {
                        feature: split.feature,
                        rule: split.rule,
                        left,
                        right,
                        left_mass: n_left,
                        right_mass: n - n_left,
                    };
                    stack.push((right, lo + n_left, hi, depth + 1));
                    stack.push((left, lo, lo + n_left, depth + 1));
                }
            }
        }
        TreeModel { nodes, class_count: self.c, schema: self.schema }
    }

    /// Returns the split and the size of its left child; leaves `goes_left` set for the node.
    fn find_split(&mut self, lo: usize, hi: usize, counts: &[usize]) -> Option<(Split, usize)> {
        let c = self.c;
        let n = hi - lo;
        let min_leaf = self.params.min_leaf;
        if n < 2 * min_leaf {
            return None;
        }
        let parent_sq: f64 = counts.iter().map(|&k| (k * k) as f64).sum();
        let base = parent_sq / n as f64;
        let mut best: Option<(usize, Candidate, f64)> = None;
        let consider = |feature: usize, cand: Candidate, score: f64, best: &mut Option<(usize, Candidate, f64)>| {
            let dec = (score - base) / self.total;
            if best.as_ref().map_or(true, |b| dec > b.2 + TIE_EPS) {
                *best = Some((feature, cand, dec));
            }
        };

        let mut left = vec![0usize; c];
        let mut right = vec![0usize; c];
        for f in 0..self.numeric.len() {
            if let Some(xs) = &self.numeric[f] {
                let order = &self.sorted[f][lo..hi];
                left.iter_mut().for_each(|v| *v = 0);
                right.copy_from_slice(counts);
                let (mut lsq, mut rsq) = (0.0f64, parent_sq);
                for i in 0..n - 1 {
                    let p = order[i] as usize;
                    let k = self.y[p] as usize;
                    lsq += (2 * left[k] + 1) as f64;
                    rsq -= (2 * right[k] - 1) as f64;
                    left[k] += 1;
                    right[k] -= 1;
                    let nl = i + 1;
                    if nl < min_leaf {
                        continue;
                    }
                    if n - nl < min_leaf {
                        break;
                    }
                    let (a, b) = (xs[p], xs[order[i + 1] as usize]);
                    if a < b {
                        let score = lsq / nl as f64 + rsq / (n - nl) as f64;
                        consider(f, Candidate::Threshold(midpoint(a, b)), score, &mut best);
                    }
                }
            } else if let Some((codes, levels)) = &self.codes[f] {
                let levels = *levels;
                let mut table = vec![0usize; levels * c];
                let mut mass = vec![0usize; levels];
                for &p in &self.members[lo..hi] {
                    let code = codes[p as usize] as usize;
                    table[code * c + self.y[p as usize] as usize] += 1;
                    mass[code] += 1;
                }
                let present: Vec<usize> = (0..levels).filter(|&l| mass[l] > 0).collect();
                if present.len() < 2 {
                    continue;
                }
                let sq = |cnt: &[usize]| cnt.iter().map(|&k| (k * k) as f64).sum::<f64>();
                for &l in &present {
                    let nl = mass[l];
                    if nl < min_leaf || n - nl < min_leaf {
                        continue;
                    }
                    let lc = &table[l * c..(l + 1) * c];
                    let rc: Vec<usize> = counts.iter().zip(lc).map(|(a, b)| a - b).collect();
                    let score = sq(lc) / nl as f64 + sq(&rc) / (n - nl) as f64;
                    consider(f, Candidate::Single(l as u32), score, &mut best);
                }
                let ordered = class0_order(&present, &table, &mass, c);
                left.iter_mut().for_each(|v| *v = 0);
                let mut nl = 0;
                for (len, &l) in ordered.iter().enumerate().take(ordered.len() - 1) {
                    for k in 0..c {
                        left[k] += table[l * c + k];
                    }
                    nl += mass[l];
                    if nl < min_leaf || n - nl < min_leaf {
                        continue;
                    }
                    let rc: Vec<usize> = counts.iter().zip(&left).map(|(a, b)| a - b).collect();
                    let score = sq(&left) / nl as f64 + sq(&rc) / (n - nl) as f64;
                    consider(f, Candidate::Prefix(len + 1), score, &mut best);
                }
            }
        }

        let (feature, cand, decrease) = best?;
        if decrease <= TIE_EPS || decrease < self.params.min_impurity_decrease {
            return None;
        }
        let rule = match cand {
            Candidate::Threshold(t) => {
                let xs = self.numeric[feature].as_ref().unwrap();
                for &p in &self.members[lo..hi] {
                    self.goes_left[p as usize] = xs[p as usize] <= t;
                }
                SplitRule::Threshold(t)
            }
            Candidate::Single(_) | Candidate::Prefix(_) => {
                let (codes, levels) = self.codes[feature].as_ref().unwrap();
                let mut mass = vec![0usize; *levels];
                let mut table = vec![0usize; levels * c];
                for &p in &self.members[lo..hi] {
                    let code = codes[p as usize] as usize;
                    mass[code] += 1;
                    table[code * c + self.y[p as usize] as usize] += 1;
                }
                let mut mask = vec![false; *levels];
                match cand {
                    Candidate::Single(l) => mask[l as usize] = true,
                    Candidate::Prefix(len) => {
                        let present: Vec<usize> = (0..*levels).filter(|&l| mass[l] > 0).collect();
                        for l in class0_order(&present, &table, &mass, c).into_iter().take(len) {
                            mask[l] = true;
                        }
                    }
                    Candidate::Threshold(_) => unreachable!(),
                }
                let nl: usize = (0..*levels).filter(|&l| mask[l]).map(|l| mass[l]).sum();
                let absent_left = nl >= n - nl;
                for l in 0..*levels {
                    if mass[l] == 0 {
                        mask[l] = absent_left;
                    }
                }
                for &p in &self.members[lo..hi] {
                    self.goes_left[p as usize] = mask[codes[p as usize] as usize];
                }
                SplitRule::LeftLevels(mask)
            }
        };
        let n_left = self.members[lo..hi].iter().filter(|&&p| self.goes_left[p as usize]).count();
        Some((Split { feature, rule, decrease }, n_left))
    }

    /// Stable partition of every per-node array by `goes_left`.
    fn partition(&mut self, lo: usize, hi: usize, n_left: usize) {
        let goes_left = &self.goes_left;
        let scratch = &mut self.scratch;
        let mut split = |slice: &mut [u32]| {
            scratch.clear();
            let mut w = 0;
            for i in 0..slice.len() {
                let p = slice[i];
                if goes_left[p as usize] {
                    slice[w] = p;
                    w += 1;
                } else {
                    scratch.push(p);
                }
            }
            debug_assert_eq!(w, n_left);
            slice[w..].copy_from_slice(scratch);
        };
        split(&mut self.members[lo..hi]);
        for order in self.sorted.iter_mut().filter(|o| !o.is_empty()) {
            split(&mut order[lo..hi]);
        }
    }
}

/// Present levels ordered by ascending share of class 0, ties by level code.
fn class0_order(present: &[usize], table: &[usize], mass: &[usize], c: usize) -> Vec<usize> {
    let mut ordered = present.to_vec();
    ordered.sort_by(|&a, &b| {
        let pa = table[a * c] as f64 / mass[a] as f64;
        let pb = table[b * c] as f64 / mass[b] as f64;
        pa.total_cmp(&pb).then(a.cmp(&b))
    });
    ordered
}

/// A value `t` with `a <= t < b`, as close to the middle as floats allow.
fn midpoint(a: f64, b: f64) -> f64 {
    let t = a / 2.0 + b / 2.0;
    if t >= a && t < b {
        t
    } else {
        a
    }
}

impl TreeModel {
    /// Assembles a tree from its node list and checks its structure.
    pub fn from_parts(nodes: Vec<Node>, class_count: usize, schema: Arc<Schema>) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::InvalidParameter("tree has no nodes".into()));
        }
        if class_count < 2 {
            return Err(Error::TooFewLabels(class_count));
        }
        let mut parents = vec![0usize; nodes.len()];
        for (id, node) in nodes.iter().enumerate() {
            match node {
                Node::Leaf { scores } => {
                    if scores.len() != class_count {
                        return Err(Error::InvalidParameter(format!(
                            "leaf {id} has {} scores, expected {class_count}",
                            scores.len()
                        )));
                    }
                    if scores.iter().any(|s| !s.is_finite() || *s < 0.0)
                        || (scores.iter().sum::<f64>() - 1.0).abs() > crate::scores::ROW_SUM_TOLERANCE
                    {
                        return Err(Error::InvalidParameter(format!("leaf {id} scores are not a distribution")));
                    }
                }
                Node::Split { feature, rule, left, right, .. } => {
                    let spec = schema.features.get(*feature).ok_or_else(|| {
                        Error::InvalidParameter(format!("node {id} splits on unknown feature {feature}"))
                    })?;
                    match (rule, &spec.kind) {
                        (SplitRule::Threshold(t), FeatureKind::Numeric) if t.is_finite() => {}
                        (SplitRule::LeftLevels(mask), FeatureKind::Categorical { levels })
                            if mask.len() == levels.len() => {}
                        _ => return Err(Error::InvalidParameter(format!("node {id} rule does not fit its feature"))),
                    }
                    for &child in [left, right] {
                        if child <= id || child >= nodes.len() {
                            return Err(Error::InvalidParameter(format!("node {id} has bad child {child}")));
                        }
                        parents[child] += 1;
                    }
                }
            }
        }
        if parents[0] != 0 || parents[1..].iter().any(|&p| p != 1) {
            return Err(Error::InvalidParameter("nodes do not form a single tree".into()));
        }
        Ok(Self { nodes, class_count, schema })
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn class_count(&self) -> usize {
        self.class_count
    }

    pub fn schema(&self) -> &Arc<Schema> {
        &self.schema
    }

    pub fn depth(&self) -> usize {
        let mut depth = vec![0usize; self.nodes.len()];
        for (id, node) in self.nodes.iter().enumerate() {
            if let Node::Split { left, right, .. } = node {
                depth[*left] = depth[id] + 1;
                depth[*right] = depth[id] + 1;
            }
        }
        depth.into_iter().max().unwrap_or(0)
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf { .. })).count()
    }

    fn leaf(&self, features: &Features, row: usize) -> &[f64] {
        let mut id = 0;
        loop {
            match &self.nodes[id] {
                Node::Leaf { scores } => return scores,
                Node::Split { feature, rule, left, right, left_mass, right_mass } => {
                    let go_left = match (rule, features.column(*feature)) {
                        (SplitRule::Threshold(t), Column::Numeric(v)) => v[row] <= *t,
                        (SplitRule::LeftLevels(mask), Column::Categorical(v)) => {
                            let code = v[row];
                            if code != UNSEEN && (code as usize) < mask.len() {
                                mask[code as usize]
                            } else {
                                left_mass >= right_mass
                            }
                        }
                        _ => unreachable!("schema was checked"),
                    };
                    id = if go_left { *left } else { *right };
                }
            }
        }
    }

    pub fn check_schema(&self, features: &Features) -> Result<()> {
        if features.schema_matches(&self.schema) {
            Ok(())
        } else {
            Err(Error::SchemaMismatch("features were not built with the tree's training schema".into()))
        }
    }

    pub fn predict_scores(&self, features: &Features) -> Result<ScoreMatrix> {
        self.check_schema(features)?;
        let n = features.rows();
        let mut data = Vec::with_capacity(n * self.class_count);
        for i in 0..n {
            data.extend_from_slice(self.leaf(features, i));
        }
        Ok(ScoreMatrix::from_raw(n, self.class_count, data))
    }

    /// One-hot rows of each leaf's argmax.
    pub fn predict_hard(&self, features: &Features) -> Result<ScoreMatrix> {
        self.check_schema(features)?;
        let labels: Vec<usize> = (0..features.rows()).map(|i| crate::scores::argmax(self.leaf(features, i))).collect();
        Ok(ScoreMatrix::one_hot(&labels, self.class_count))
    }

    pub fn predict(&self, features: &Features) -> Result<Vec<usize>> {
        Ok(self.predict_scores(features)?.classify())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{FeatureSpec, Schema};

    fn numeric(xs: &[f64], ys: &[usize], c: usize) -> Dataset {
        let schema = Arc::new(Schema {
            features: vec![FeatureSpec { name: "x".into(), kind: FeatureKind::Numeric }],
            label_name: "y".into(),
        });
        let f = Features::new(schema, vec![Column::Numeric(xs.to_vec())]).unwrap();
        Dataset::new(f, ys.to_vec(), (0..c).map(|i| i.to_string()).collect()).unwrap()
    }

    #[test]
    fn gini_values() {
        assert_eq!(gini(&[5, 0, 0]).unwrap(), 0.0);
        assert_eq!(gini(&[1, 1]).unwrap(), 0.5);
        assert!((gini(&[2, 1, 1]).unwrap() - 0.625).abs() < 1e-15);
        assert!(gini(&[0, 0]).is_err());
        assert!(gini(&[]).is_err());
    }

    #[test]
    fn param_validation() {
        assert!(TreeParams::default().validate().is_ok());
        assert!(TreeParams { min_leaf: 0, ..Default::default() }.validate().is_err());
        assert!(TreeParams { min_split: 13, min_leaf: 7, ..Default::default() }.validate().is_err());
        assert!(TreeParams { max_depth: Some(0), ..Default::default() }.validate().is_err());
        assert!(TreeParams { min_impurity_decrease: -1.0, ..Default::default() }.validate().is_err());
    }

    #[test]
    fn pure_data_is_a_leaf() {
        let ds = numeric(&[1.0, 2.0, 3.0], &[1, 1, 1], 3);
        let t = fit_tree(&ds, &TreeParams::default()).unwrap();
        assert_eq!(t.nodes(), &[Node::Leaf { scores: vec![0.0, 1.0, 0.0] }]);
    }

    #[test]
    fn separable_line_splits_once() {
        let xs: Vec<f64> = (-10..10).map(|i| i as f64 + 0.5).collect();
        let ys: Vec<usize> = xs.iter().map(|&x| usize::from(x >= 0.0)).collect();
        let ds = numeric(&xs, &ys, 2);
        let t = fit_tree(&ds, &TreeParams::default()).unwrap();
        assert_eq!(t.depth(), 1);
        assert_eq!(t.predict(ds.features()).unwrap(), ys);
        let rows: Vec<usize> = (0..20).collect();
        let s = best_split(&ds, &rows, &TreeParams::default()).unwrap().unwrap();
        assert_eq!(s.rule, SplitRule::Threshold(0.0));
        assert!((s.decrease - 0.5).abs() < 1e-12);
    }

    #[test]
    fn too_small_for_a_split() {
        let ds = numeric(&[0.0, 1.0, 2.0, 3.0], &[0, 0, 1, 1], 2);
        let t = fit_tree(&ds, &TreeParams::default()).unwrap();
        assert_eq!(t.nodes(), &[Node::Leaf { scores: vec![0.5, 0.5] }]);
    }

    #[test]
    fn constant_feature_has_no_split() {
        let ds = numeric(&[1.0; 30], &(0..30).map(|i| i % 2).collect::<Vec<_>>(), 2);
        let rows: Vec<usize> = (0..30).collect();
        assert!(best_split(&ds, &rows, &TreeParams::default()).unwrap().is_none());
    }

    #[test]
    fn categorical_split_and_unseen_level() {
        let schema = Arc::new(Schema {
            features: vec![FeatureSpec {
                name: "c".into(),
                kind: FeatureKind::Categorical { levels: vec!["a".into(), "b".into(), "c".into(), "d".into()] },
            }],
            label_name: "y".into(),
        });
        // level a: class 0, levels b/c: class 1, level d absent in training.
        let codes: Vec<u32> = (0..40)
            .map(|i| {
                if i < 25 {
                    0
                } else if i < 33 {
                    1
                } else {
                    2
                }
            })
            .collect();
        let ys: Vec<usize> = codes.iter().map(|&c| usize::from(c != 0)).collect();
        let f = Features::new(Arc::clone(&schema), vec![Column::Categorical(codes)]).unwrap();
        let ds = Dataset::new(f, ys.clone(), vec!["n".into(), "p".into()]).unwrap();
        let t = fit_tree(&ds, &TreeParams::default()).unwrap();
        assert_eq!(t.predict(ds.features()).unwrap(), ys);
        match &t.nodes()[0] {
            Node::Split { rule: SplitRule::LeftLevels(mask), left_mass, right_mass, .. } => {
                assert_eq!(mask, &vec![true, false, false, true]);
                assert_eq!((*left_mass, *right_mass), (25, 15));
            }
            other => panic!("{other:?}"),
        }
        let probe = Features::new(schema, vec![Column::Categorical(vec![3, UNSEEN])]).unwrap();
        assert_eq!(t.predict(&probe).unwrap(), vec![0, 0]);
    }

    #[test]
    fn schema_mismatch_is_an_error() {
        let ds = numeric(&[0.0, 1.0], &[0, 1], 2);
        let t = fit_tree(&ds, &TreeParams::default()).unwrap();
        let other = Arc::new(Schema {
            features: vec![FeatureSpec { name: "z".into(), kind: FeatureKind::Numeric }],
            label_name: "y".into(),
        });
        let f = Features::new(other, vec![Column::Numeric(vec![0.0])]).unwrap();
        assert!(matches!(t.predict_scores(&f), Err(Error::SchemaMismatch(_))));
    }

    #[test]
    fn from_parts_rejects_broken_trees() {
        let ds = numeric(&[0.0, 1.0], &[0, 1], 2);
        let schema = Arc::clone(ds.schema());
        let leaf = || Node::Leaf { scores: vec![0.5, 0.5] };
        let split = |l, r| Node::Split {
            feature: 0,
            rule: SplitRule::Threshold(0.5),
            left: l,
            right: r,
            left_mass: 1,
            right_mass: 1,
        };
        assert!(TreeModel::from_parts(vec![split(1, 2), leaf(), leaf()], 2, Arc::clone(&schema)).is_ok());
        assert!(TreeModel::from_parts(vec![split(0, 2), leaf(), leaf()], 2, Arc::clone(&schema)).is_err());
        assert!(TreeModel::from_parts(vec![split(1, 1), leaf(), leaf()], 2, Arc::clone(&schema)).is_err());
        assert!(TreeModel::from_parts(vec![split(1, 5), leaf()], 2, Arc::clone(&schema)).is_err());
        assert!(TreeModel::from_parts(vec![leaf(), leaf()], 2, Arc::clone(&schema)).is_err());
        assert!(TreeModel::from_parts(vec![Node::Leaf { scores: vec![0.7, 0.7] }], 2, Arc::clone(&schema)).is_err());
        assert!(TreeModel::from_parts(vec![], 2, schema).is_err());
    }
}
