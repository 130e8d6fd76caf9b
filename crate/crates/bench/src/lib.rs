//! Benchmark harness: repeated stratified cross-validation of KFHE and the
//! reference learners, with optional label noise, written out as CSV tables.

pub mod algorithm;
pub mod config;
pub mod experiment;
pub mod output;
pub mod reference;

pub use algorithm::Algorithm;
pub use config::ExperimentConfig;
pub use experiment::{run, Outcome, Record};
