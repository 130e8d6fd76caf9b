//! Published mean macro-F1 scores for the 30-dataset, 7-algorithm grid at
//! each noise level.

use kfhe::metrics::ScoreTable;

const PUBLISHED: &str = include_str!("../reference/published_macro_f1.csv");

pub const ALGORITHMS: [&str; 7] = ["kfhe-e", "kfhe-l", "adaboost", "gbm", "s-gbm", "bagging", "cart"];

#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub noise: f64,
    pub dataset: String,
    pub algorithm: String,
    pub macro_f1: f64,
}

pub fn entries() -> Vec<Entry> {
    let mut reader = csv::Reader::from_reader(PUBLISHED.as_bytes());
    reader
        .records()
        .map(|r| {
            let r = r.expect("bundled reference table is valid CSV");
            Entry {
                noise: r[0].parse().expect("noise"),
                dataset: r[1].to_string(),
                algorithm: r[2].to_string(),
                macro_f1: r[3].parse().expect("macro_f1"),
            }
        })
        .collect()
}

pub fn lookup(noise: f64, dataset: &str, algorithm: &str) -> Option<f64> {
    entries()
        .into_iter()
        .find(|e| e.noise == noise && e.dataset == dataset && e.algorithm == algorithm)
        .map(|e| e.macro_f1)
}

/// Dataset × algorithm table at one noise level, datasets in file order.
pub fn table(noise: f64) -> ScoreTable {
    let mut t = ScoreTable::new(Vec::new(), ALGORITHMS.iter().map(|a| a.to_string()).collect());
    for e in entries().into_iter().filter(|e| e.noise == noise) {
        t.insert(&e.dataset, &e.algorithm, e.macro_f1);
    }
    t
}

pub fn noise_levels() -> Vec<f64> {
    let mut v: Vec<f64> = Vec::new();
    for e in entries() {
        if !v.contains(&e.noise) {
            v.push(e.noise);
        }
    }
    v
}
