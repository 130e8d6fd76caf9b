//! CSV writers for benchmark outcomes. Column layouts are stable.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use kfhe::metrics::{average_ranks, RankTable, ScoreTable};

use crate::experiment::{Failure, Outcome, Record, Summary};
use crate::Algorithm;

pub const RESULTS_HEADER: [&str; 7] = ["dataset", "algorithm", "noise", "repeat", "fold", "macro_f1", "error_rate"];
pub const TIMINGS_HEADER: [&str; 9] =
    ["dataset", "algorithm", "noise", "repeat", "fold", "train_ms", "components", "resets", "gain_mismatches"];
pub const FAILURES_HEADER: [&str; 6] = ["dataset", "algorithm", "noise", "repeat", "fold", "message"];
pub const SUMMARY_HEADER: [&str; 5] = ["dataset", "algorithm", "noise", "mean_f1", "sd_f1"];

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

fn writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))
}

fn key(r: &Record) -> [String; 5] {
    [r.dataset.clone(), r.algorithm.to_string(), r.noise.to_string(), r.repeat.to_string(), r.fold.to_string()]
}

pub fn write_results(path: &Path, records: &[Record]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(RESULTS_HEADER)?;
    for r in records {
        let [a, b, c, d, e] = key(r);
        w.write_record([a, b, c, d, e, r.macro_f1.to_string(), r.error_rate.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_timings(path: &Path, records: &[Record]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(TIMINGS_HEADER)?;
    for r in records {
        let [a, b, c, d, e] = key(r);
        w.write_record([
            a,
            b,
            c,
            d,
            e,
            format!("{:.3}", r.train_ms),
            r.components.to_string(),
            r.resets.to_string(),
            r.gain_mismatches.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_failures(path: &Path, failures: &[Failure]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(FAILURES_HEADER)?;
    for f in failures {
        w.write_record([
            f.dataset.clone(),
            f.algorithm.clone(),
            opt(f.noise),
            opt(f.repeat),
            opt(f.fold),
            f.message.clone(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Long format, one row per (dataset, algorithm, noise).
pub fn write_summary(path: &Path, summaries: &[Summary]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(SUMMARY_HEADER)?;
    for s in summaries {
        w.write_record([
            s.dataset.clone(),
            s.algorithm.to_string(),
            s.noise.to_string(),
            format!("{:.6}", s.mean_f1),
            format!("{:.6}", s.sd_f1),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Mean macro-F1 table for one noise level over the datasets where every
/// algorithm has a mean.
pub fn score_table(summaries: &[Summary], datasets: &[String], algorithms: &[Algorithm], noise: f64) -> ScoreTable {
    let mut table = ScoreTable::new(Vec::new(), algorithms.iter().map(|a| a.to_string()).collect());
    for d in datasets {
        let row: Option<Vec<f64>> = algorithms
            .iter()
            .map(|&a| crate::experiment::mean_f1(summaries, d, a, noise).filter(|v| !v.is_nan()))
            .collect();
        if let Some(row) = row {
            for (a, v) in algorithms.iter().zip(row) {
                table.insert(d, a.name(), v);
            }
        }
    }
    table
}

pub fn ranks_path(dir: &Path, noise: f64) -> PathBuf {
    dir.join(format!("ranks_{noise}.csv"))
}

/// Per-dataset ranks then a final `mean` row.
pub fn write_ranks(path: &Path, ranks: &RankTable) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(std::iter::once("dataset").chain(ranks.algorithms.iter().map(String::as_str)))?;
    for (i, d) in ranks.datasets.iter().enumerate() {
        let cells = (0..ranks.algorithms.len()).map(|a| ranks.rank(i, a).to_string());
        w.write_record(std::iter::once(d.clone()).chain(cells))?;
    }
    w.write_record(std::iter::once("mean".to_string()).chain(ranks.mean_ranks.iter().map(|r| format!("{r:.4}"))))?;
    w.flush()?;
    Ok(())
}

/// Rows are noise levels, columns the algorithms' mean ranks.
pub fn write_rank_summary(path: &Path, rows: &[(f64, RankTable)], algorithms: &[Algorithm]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(std::iter::once("noise").chain(algorithms.iter().map(|a| a.name())))?;
    for (noise, ranks) in rows {
        w.write_record(std::iter::once(noise.to_string()).chain(ranks.mean_ranks.iter().map(|r| format!("{r:.4}"))))?;
    }
    w.flush()?;
    Ok(())
}

/// Writes results, timings, failures, rank tables and either `summary.csv` or
/// `sweep.csv` into `dir`.
pub fn write_all(dir: &Path, outcome: &Outcome, algorithms: &[Algorithm], noise: &[f64], sweep: bool) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    write_results(&dir.join("results.csv"), &outcome.records)?;
    write_timings(&dir.join("timings.csv"), &outcome.records)?;
    write_failures(&dir.join("failures.csv"), &outcome.failures)?;
    let summaries = crate::experiment::summarize(&outcome.records);
    if sweep {
        let mut long = summaries.clone();
        long.sort_by(|a, b| {
            let pos = |d: &str| outcome.datasets.iter().position(|x| x == d);
            let alg = |x: Algorithm| algorithms.iter().position(|&a| a == x);
            (pos(&a.dataset), alg(a.algorithm))
                .cmp(&(pos(&b.dataset), alg(b.algorithm)))
                .then(a.noise.total_cmp(&b.noise))
        });
        write_summary(&dir.join("sweep.csv"), &long)?;
    } else {
        write_summary(&dir.join("summary.csv"), &summaries)?;
    }
    let mut rows = Vec::new();
    for &p in noise {
        let table = score_table(&summaries, &outcome.datasets, algorithms, p);
        if table.datasets.is_empty() {
            continue;
        }
        let ranks = average_ranks(&table, true)?;
        write_ranks(&ranks_path(dir, p), &ranks)?;
        rows.push((p, ranks));
    }
    write_rank_summary(&dir.join("rank_summary.csv"), &rows, algorithms)?;
    Ok(())
}
