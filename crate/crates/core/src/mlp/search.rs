//! Random hyperparameter search with a stratified holdout split.

use ndarray::{ArrayView2, Axis};
use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::network::{Activation, HiddenLayer, MlpConfig, OptimizerKind};
use super::train::train;
use crate::error::{Error, Result};
use crate::rng::{derive_seed, stream};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchSpace {
    pub layers: (usize, usize),
    pub units: (usize, usize),
    pub dropout: (f64, f64),
    pub activations: Vec<Activation>,
    pub optimizers: Vec<OptimizerKind>,
    /// Sampled log-uniformly.
    pub learning_rate: (f64, f64),
    pub n_trials: usize,
    pub holdout_fraction: f64,
    pub l2_lambda: f64,
    pub epochs: usize,
    pub batch_size: usize,
}

impl Default for SearchSpace {
    fn default() -> Self {
        Self {
            layers: (1, 2),
            units: (20, 30),
            dropout: (0.1, 0.9),
            activations: vec![Activation::Relu, Activation::LeakyRelu],
            optimizers: vec![OptimizerKind::Adam, OptimizerKind::RmsProp],
            learning_rate: (1e-4, 1e-2),
            n_trials: 100,
            holdout_fraction: 0.2,
            l2_lambda: 0.01,
            epochs: 200,
            batch_size: 32,
        }
    }
}

impl SearchSpace {
    fn validate(&self) -> Result<()> {
        let ok = self.layers.0 >= 1
            && self.layers.0 <= self.layers.1
            && self.units.0 >= 1
            && self.units.0 <= self.units.1
            && self.dropout.0 >= 0.0
            && self.dropout.0 <= self.dropout.1
            && self.dropout.1 < 1.0
            && !self.activations.is_empty()
            && !self.optimizers.is_empty()
            && self.learning_rate.0 > 0.0
            && self.learning_rate.0 <= self.learning_rate.1
            && self.n_trials >= 1
            && self.holdout_fraction > 0.0
            && self.holdout_fraction < 1.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("search space {self:?}")))
        }
    }

    /// Draw one configuration; `seed` becomes the config's training seed.
    pub fn sample(&self, rng: &mut impl Rng, seed: u64) -> MlpConfig {
        let n_layers = rng.random_range(self.layers.0..=self.layers.1);
        let hidden = (0..n_layers)
            .map(|_| HiddenLayer {
                units: rng.random_range(self.units.0..=self.units.1),
                dropout: if self.dropout.0 == self.dropout.1 {
                    self.dropout.0
                } else {
                    rng.random_range(self.dropout.0..self.dropout.1)
                },
                activation: *self.activations.choose(rng).expect("non-empty"),
            })
            .collect();
        let optimizer = *self.optimizers.choose(rng).expect("non-empty");
        let (lo, hi) = (self.learning_rate.0.ln(), self.learning_rate.1.ln());
        let learning_rate = if lo == hi { self.learning_rate.0 } else { rng.random_range(lo..hi).exp() };
        MlpConfig {
            hidden,
            optimizer,
            learning_rate,
            l2_lambda: self.l2_lambda,
            epochs: self.epochs,
            batch_size: self.batch_size,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub config: MlpConfig,
    /// Fraction of holdout rows classified correctly; absent when training failed.
    pub holdout_accuracy: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomSearchOutcome {
    pub best: MlpConfig,
    pub best_trial: usize,
    pub leaderboard: Vec<TrialRecord>,
}

/// Stratified split: per class, `round(fraction * count)` rows (at least one) go to the holdout.
pub fn holdout_split(y: &[u8], fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    let mut rng = stream(seed, u64::MAX);
    let mut train_idx = Vec::new();
    let mut hold_idx = Vec::new();
    for class in 0..=1u8 {
        let mut members: Vec<usize> = (0..y.len()).filter(|&i| y[i] == class).collect();
        if members.len() < 2 {
            return Err(Error::ClassTooSmall {
                class,
                count: members.len(),
                folds: 2,
            });
        }
        members.shuffle(&mut rng);
        let n_hold = ((fraction * members.len() as f64).round() as usize).clamp(1, members.len() - 1);
        hold_idx.extend_from_slice(&members[..n_hold]);
        train_idx.extend_from_slice(&members[n_hold..]);
    }
    train_idx.sort_unstable();
    hold_idx.sort_unstable();
    Ok((train_idx, hold_idx))
}

/// Sample `n_trials` configs, train each on the training part of a holdout split and rank
/// by holdout accuracy (ties to the earlier trial). Each trial draws from its own stream.
pub fn random_search(x: ArrayView2<'_, f64>, y: &[u8], space: &SearchSpace, seed: u64) -> Result<RandomSearchOutcome> {
    space.validate()?;
    if x.nrows() != y.len() {
        return Err(Error::DimensionMismatch {
            context: "search labels",
            expected: x.nrows(),
            found: y.len(),
        });
    }
    let (train_idx, hold_idx) = holdout_split(y, space.holdout_fraction, seed)?;
    let x_train = x.select(Axis(0), &train_idx);
    let y_train: Vec<u8> = train_idx.iter().map(|&i| y[i]).collect();
    let x_hold = x.select(Axis(0), &hold_idx);
    let y_hold: Vec<u8> = hold_idx.iter().map(|&i| y[i]).collect();

    let leaderboard: Vec<TrialRecord> = (0..space.n_trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = stream(seed, trial as u64);
            let config = space.sample(&mut rng, derive_seed(seed ^ 0x5EA2C4, trial as u64));
            let scored = train(x_train.view(), &y_train, &config).and_then(|out| out.model.predict(x_hold.view()));
            match scored {
                Ok(pred) => {
                    let correct = pred.iter().zip(&y_hold).filter(|(a, b)| a == b).count();
                    TrialRecord {
                        trial,
                        config,
                        holdout_accuracy: Some(correct as f64 / y_hold.len() as f64),
                        error: None,
                    }
                }
                Err(e) => TrialRecord {
                    trial,
                    config,
                    holdout_accuracy: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();

    let mut best: Option<(usize, f64)> = None;
    for r in &leaderboard {
        if let Some(acc) = r.holdout_accuracy {
            if best.is_none_or(|(_, b)| acc > b) {
                best = Some((r.trial, acc));
            }
        }
    }
    let (best_trial, _) = best.ok_or_else(|| Error::InvalidParameter("every search trial failed".into()))?;
    Ok(RandomSearchOutcome {
        best: leaderboard[best_trial].config.clone(),
        best_trial,
        leaderboard,
    })
}
