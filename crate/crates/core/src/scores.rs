use crate::error::{Error, Result};

/// Row-major n×c matrix of per-class scores. Each row is a distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

pub const ROW_SUM_TOLERANCE: f64 = 1e-9;

impl ScoreMatrix {
    /// Checks that entries are finite, non-negative and that rows sum to 1.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if cols == 0 {
            return Err(Error::InvalidScores("zero columns".into()));
        }
        if data.len() != rows * cols {
            return Err(Error::ShapeMismatch { expected: (rows, cols), found: (data.len() / cols, cols) });
        }
        let m = Self { rows, cols, data };
        m.validate()?;
        Ok(m)
    }

    pub(crate) fn from_raw(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), rows * cols);
        Self { rows, cols, data }
    }

    pub fn uniform(rows: usize, cols: usize) -> Self {
        Self::from_raw(rows, cols, vec![1.0 / cols as f64; rows * cols])
    }

    pub fn one_hot(labels: &[usize], cols: usize) -> Self {
        let mut data = vec![0.0; labels.len() * cols];
        for (i, &l) in labels.iter().enumerate() {
            data[i * cols + l] = 1.0;
        }
        Self::from_raw(labels.len(), cols, data)
    }

    pub fn validate(&self) -> Result<()> {
        for (i, row) in self.iter_rows().enumerate() {
            if row.iter().any(|v| !v.is_finite() || *v < 0.0) {
                return Err(Error::InvalidScores(format!("row {i} has a negative or non-finite entry")));
            }
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > ROW_SUM_TOLERANCE {
                return Err(Error::InvalidScores(format!("row {i} sums to {s}")));
            }
        }
        Ok(())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.cols)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn classify(&self) -> Vec<usize> {
        self.iter_rows().map(argmax).collect()
    }
}

/// Index of the largest entry; the lowest index wins ties.
pub fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (j, &v) in row.iter().enumerate().skip(1) {
        if v > row[best] {
            best = j;
        }
    }
    best
}

pub fn classify(scores: &ScoreMatrix) -> Vec<usize> {
    scores.classify()
}
