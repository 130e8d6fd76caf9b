//! Confusion matrices, macro-averaged F1 and average-rank tables.

use crate::error::{Error, Result};

/// Rows are true classes, columns predicted classes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionMatrix {
    classes: usize,
    counts: Vec<u64>,
}

impl ConfusionMatrix {
    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn get(&self, truth: usize, predicted: usize) -> u64 {
        self.counts[truth * self.classes + predicted]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn rows(&self) -> Vec<Vec<u64>> {
        self.counts.chunks_exact(self.classes).map(<[u64]>::to_vec).collect()
    }

    /// Per-class F1, zero when precision or recall is undefined or both are zero.
    pub fn f1_scores(&self) -> Vec<f64> {
        let c = self.classes;
        (0..c)
            .map(|i| {
                let tp = self.get(i, i) as f64;
                let predicted: u64 = (0..c).map(|r| self.get(r, i)).sum();
                let actual: u64 = (0..c).map(|p| self.get(i, p)).sum();
                if predicted == 0 || actual == 0 {
                    return 0.0;
                }
                let precision = tp / predicted as f64;
                let recall = tp / actual as f64;
                if precision + recall == 0.0 {
                    0.0
                } else {
                    2.0 * precision * recall / (precision + recall)
                }
            })
            .collect()
    }

    /// Averaged over every declared class, present in the data or not.
    pub fn macro_f1(&self) -> f64 {
        self.f1_scores().iter().sum::<f64>() / self.classes as f64
    }
}

pub fn confusion(truth: &[usize], predicted: &[usize], classes: usize) -> Result<ConfusionMatrix> {
    if truth.len() != predicted.len() {
        return Err(Error::LengthMismatch { left: truth.len(), right: predicted.len() });
    }
    if classes == 0 {
        return Err(Error::InvalidParameter("confusion matrix needs at least one class".into()));
    }
    let mut counts = vec![0u64; classes * classes];
    for (&t, &p) in truth.iter().zip(predicted) {
        if t >= classes || p >= classes {
            return Err(Error::LabelOutOfRange { label: t.max(p), classes });
        }
        counts[t * classes + p] += 1;
    }
    Ok(ConfusionMatrix { classes, counts })
}

pub fn macro_f1(truth: &[usize], predicted: &[usize], classes: usize) -> Result<f64> {
    Ok(confusion(truth, predicted, classes)?.macro_f1())
}

pub fn misclassification_rate(truth: &[usize], predicted: &[usize]) -> Result<f64> {
    if truth.len() != predicted.len() {
        return Err(Error::LengthMismatch { left: truth.len(), right: predicted.len() });
    }
    if truth.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let wrong = truth.iter().zip(predicted).filter(|(a, b)| a != b).count();
    Ok(wrong as f64 / truth.len() as f64)
}

/// Dataset × algorithm score grid; cells may be missing until ranked.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreTable {
    pub datasets: Vec<String>,
    pub algorithms: Vec<String>,
    cells: Vec<Option<f64>>,
}

impl ScoreTable {
    pub fn new(datasets: Vec<String>, algorithms: Vec<String>) -> Self {
        let cells = vec![None; datasets.len() * algorithms.len()];
        Self { datasets, algorithms, cells }
    }

    pub fn set(&mut self, dataset: usize, algorithm: usize, value: f64) {
        let m = self.algorithms.len();
        self.cells[dataset * m + algorithm] = Some(value);
    }

    pub fn get(&self, dataset: usize, algorithm: usize) -> Option<f64> {
        self.cells[dataset * self.algorithms.len() + algorithm]
    }

    /// Sets a cell by names, adding rows or columns as needed.
    pub fn insert(&mut self, dataset: &str, algorithm: &str, value: f64) {
        let a = match self.algorithms.iter().position(|x| x == algorithm) {
            Some(a) => a,
            None => {
                let m = self.algorithms.len();
                let mut cells = Vec::with_capacity(self.datasets.len() * (m + 1));
                for d in 0..self.datasets.len() {
                    cells.extend_from_slice(&self.cells[d * m..(d + 1) * m]);
                    cells.push(None);
                }
                self.cells = cells;
                self.algorithms.push(algorithm.to_string());
                m
            }
        };
        let d = match self.datasets.iter().position(|x| x == dataset) {
            Some(d) => d,
            None => {
                self.datasets.push(dataset.to_string());
                self.cells.extend(std::iter::repeat(None).take(self.algorithms.len()));
                self.datasets.len() - 1
            }
        };
        self.set(d, a, value);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankTable {
    pub datasets: Vec<String>,
    pub algorithms: Vec<String>,
    /// Row-major dataset × algorithm; 1 is best, ties share the mean rank.
    pub ranks: Vec<f64>,
    pub mean_ranks: Vec<f64>,
}

impl RankTable {
    pub fn rank(&self, dataset: usize, algorithm: usize) -> f64 {
        self.ranks[dataset * self.algorithms.len() + algorithm]
    }

    pub fn mean_rank(&self, algorithm: &str) -> Option<f64> {
        self.algorithms.iter().position(|a| a == algorithm).map(|i| self.mean_ranks[i])
    }
}

/// Ranks within one row; exactly equal values share their average position.
pub fn rank_row(values: &[f64], higher_is_better: bool) -> Vec<f64> {
    let m = values.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| {
        let o = values[a].total_cmp(&values[b]);
        if higher_is_better {
            o.reverse()
        } else {
            o
        }
    });
    let mut ranks = vec![0.0; m];
    let mut i = 0;
    while i < m {
        let mut j = i;
        while j + 1 < m && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let shared = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = shared;
        }
        i = j + 1;
    }
    ranks
}

pub fn average_ranks(table: &ScoreTable, higher_is_better: bool) -> Result<RankTable> {
    let m = table.algorithms.len();
    let d = table.datasets.len();
    if m == 0 || d == 0 {
        return Err(Error::InvalidParameter("rank table needs at least one dataset and algorithm".into()));
    }
    let mut ranks = Vec::with_capacity(d * m);
    for i in 0..d {
        let row = (0..m)
            .map(|a| {
                table.get(i, a).filter(|v| !v.is_nan()).ok_or_else(|| Error::MissingScore {
                    dataset: table.datasets[i].clone(),
                    algorithm: table.algorithms[a].clone(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        ranks.extend(rank_row(&row, higher_is_better));
    }
    let mean_ranks = (0..m).map(|a| (0..d).map(|i| ranks[i * m + a]).sum::<f64>() / d as f64).collect();
    Ok(RankTable { datasets: table.datasets.clone(), algorithms: table.algorithms.clone(), ranks, mean_ranks })
}

pub fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn confusion_examples() {
        let cm = confusion(&[1, 0, 0, 1], &[1, 0, 1, 1], 2).unwrap();
        assert_eq!(cm.rows(), vec![vec![1, 1], vec![0, 2]]);
        let diag = confusion(&[0, 1, 2], &[0, 1, 2], 3).unwrap();
        assert_eq!(diag.rows(), vec![vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]]);
        let col = confusion(&[0, 1, 2], &[0, 0, 0], 3).unwrap();
        assert_eq!(col.rows(), vec![vec![1, 0, 0], vec![1, 0, 0], vec![1, 0, 0]]);
        assert!(confusion(&[0], &[0, 1], 2).is_err());
        assert!(confusion(&[0], &[2], 2).is_err());
    }

    #[test]
    fn macro_f1_examples() {
        assert_eq!(macro_f1(&[0, 1, 2, 1], &[0, 1, 2, 1], 3).unwrap(), 1.0);
        let v = macro_f1(&[1, 0, 0, 1], &[1, 0, 1, 1], 2).unwrap();
        assert!((v - (2.0 / 3.0 + 0.8) / 2.0).abs() < 1e-15);
        assert_eq!(macro_f1(&[0, 1, 0], &[1, 0, 1], 2).unwrap(), 0.0);
        // A class absent from both vectors still counts in the denominator.
        assert_eq!(macro_f1(&[0, 1], &[0, 1], 3).unwrap(), 2.0 / 3.0);
    }

    #[test]
    fn misclassification_examples() {
        assert_eq!(misclassification_rate(&[0, 1], &[0, 1]).unwrap(), 0.0);
        assert_eq!(misclassification_rate(&[0, 1], &[1, 0]).unwrap(), 1.0);
        assert_eq!(misclassification_rate(&[0, 1, 1, 0], &[0, 1, 1, 1]).unwrap(), 0.25);
        assert!(misclassification_rate(&[], &[]).is_err());
    }

    #[test]
    fn ranks_with_ties() {
        assert_eq!(rank_row(&[0.9, 0.9, 0.5], true), vec![1.5, 1.5, 3.0]);
        assert_eq!(rank_row(&[0.1, 0.3, 0.2], true), vec![3.0, 1.0, 2.0]);
        assert_eq!(rank_row(&[0.1, 0.3, 0.2], false), vec![1.0, 3.0, 2.0]);
        assert_eq!(rank_row(&[1.0, 1.0, 1.0, 0.0], true), vec![2.0, 2.0, 2.0, 4.0]);
    }

    #[test]
    fn average_ranks_needs_every_cell() {
        let mut t = ScoreTable::new(vec!["d1".into(), "d2".into()], vec!["a".into(), "b".into()]);
        t.set(0, 0, 0.9);
        t.set(0, 1, 0.8);
        t.set(1, 0, 0.5);
        assert!(matches!(average_ranks(&t, true), Err(Error::MissingScore { .. })));
        t.set(1, 1, 0.7);
        let r = average_ranks(&t, true).unwrap();
        assert_eq!(r.mean_ranks, vec![1.5, 1.5]);
        assert_eq!(r.rank(1, 1), 1.0);
    }

    #[test]
    fn insert_grows_the_table() {
        let mut t = ScoreTable::new(Vec::new(), Vec::new());
        t.insert("d1", "a", 1.0);
        t.insert("d1", "b", 2.0);
        t.insert("d2", "a", 3.0);
        t.insert("d2", "b", 4.0);
        assert_eq!(t.get(0, 1), Some(2.0));
        assert_eq!(t.get(1, 0), Some(3.0));
        assert_eq!(t.get(1, 1), Some(4.0));
    }

    #[test]
    fn sample_sd() {
        let (m, s) = mean_sd(&[1.0, 2.0, 3.0]);
        assert_eq!(m, 2.0);
        assert_eq!(s, 1.0);
    }
}
