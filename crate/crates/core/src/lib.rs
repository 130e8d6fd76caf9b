//! KFHE: an ensemble classifier that treats boosting as two coupled scalar
//! Kalman filters, one over the ensemble's class-score state and one over the
//! training-sample weights. CART trees are the base learner.
//!
//! Bagging, SAMME and a single tree are included as reference learners, along
//! with the metrics and resampling helpers a benchmark needs.

pub mod baselines;
pub mod cart;
pub mod dataset;
pub mod ensemble;
mod error;
pub mod metrics;
pub mod model_io;
pub mod rng;
pub mod scores;

pub use baselines::{BaggingModel, SammeModel};
pub use cart::{TreeModel, TreeParams};
pub use dataset::{Dataset, Features, Schema};
pub use ensemble::{KfheModel, TrainConfig, Variant};
pub use error::{Error, Result};
pub use model_io::Model;
pub use scores::ScoreMatrix;
