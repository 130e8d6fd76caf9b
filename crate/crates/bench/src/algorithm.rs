use std::fmt;
use std::str::FromStr;

use kfhe::baselines::{bagging_train, samme_train};
use kfhe::cart::fit_tree;
use kfhe::ensemble::train;
use kfhe::model_io::Model;
use kfhe::{Dataset, TrainConfig, TreeParams, Variant};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    KfheE,
    KfheL,
    Adaboost,
    Bagging,
    Cart,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] =
        [Algorithm::KfheE, Algorithm::KfheL, Algorithm::Adaboost, Algorithm::Bagging, Algorithm::Cart];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::KfheE => "kfhe-e",
            Algorithm::KfheL => "kfhe-l",
            Algorithm::Adaboost => "adaboost",
            Algorithm::Bagging => "bagging",
            Algorithm::Cart => "cart",
        }
    }

    pub fn variant(self) -> Option<Variant> {
        match self {
            Algorithm::KfheE => Some(Variant::Exponential),
            Algorithm::KfheL => Some(Variant::Linear),
            _ => None,
        }
    }

    pub fn kfhe(variant: Variant) -> Self {
        match variant {
            Variant::Exponential => Algorithm::KfheE,
            Variant::Linear => Algorithm::KfheL,
        }
    }

    /// Trains on the whole dataset. `rounds` is the ensemble size for every
    /// ensemble method and ignored by the single tree.
    pub fn train(self, ds: &Dataset, rounds: usize, tree: &TreeParams, seed: u64) -> kfhe::Result<Trained> {
        let model = match self.variant() {
            Some(variant) => {
                let cfg = TrainConfig { iterations: rounds, tree: *tree, seed, ..Default::default() };
                let fit = train(ds, &cfg, variant)?;
                let trace = fit.model.trace();
                return Ok(Trained {
                    resets: trace.iter().map(|r| r.resets).sum(),
                    gain_mismatches: trace.iter().filter(|r| r.k_w != r.k_y).count(),
                    model: Model::Kfhe(fit.model),
                });
            }
            None => match self {
                Algorithm::Adaboost => Model::Samme(samme_train(ds, rounds, tree, seed)?),
                Algorithm::Bagging => Model::Bagging(bagging_train(ds, rounds, tree, seed)?),
                _ => Model::Cart(fit_tree(ds, tree)?),
            },
        };
        Ok(Trained { model, resets: 0, gain_mismatches: 0 })
    }
}

#[derive(Debug, Clone)]
pub struct Trained {
    pub model: Model,
    /// Rejected weak measurements (KFHE only).
    pub resets: usize,
    /// Accepted KFHE iterations whose weight-filter gain differs from the model-filter gain.
    pub gain_mismatches: usize,
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| format!("unknown algorithm {s:?}; expected one of kfhe-e, kfhe-l, adaboost, bagging, cart"))
    }
}
