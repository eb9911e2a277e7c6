//! Cross-validated linear-SVM accuracy as a subset criterion.

use ndarray::Axis;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::FeatureMatrix;
use crate::error::{Error, Result};
use crate::svm::{svm_predict, svm_train, SvmConfig};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriterionConfig {
    pub folds: usize,
    pub svm: SvmConfig,
}

impl Default for CriterionConfig {
    fn default() -> Self {
        Self {
            folds: 5,
            svm: SvmConfig::default(),
        }
    }
}

/// Stratified k-fold assignment: each class is shuffled with `seed` and dealt round-robin.
pub fn stratified_folds(labels: &[u8], folds: usize, seed: u64) -> Result<Vec<usize>> {
    if folds < 2 {
        return Err(Error::InvalidParameter(format!("need at least 2 folds, got {folds}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignment = vec![0; labels.len()];
    for class in 0..=1u8 {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        if members.len() < folds {
            return Err(Error::ClassTooSmall {
                class,
                count: members.len(),
                folds,
            });
        }
        members.shuffle(&mut rng);
        for (k, &i) in members.iter().enumerate() {
            assignment[i] = k % folds;
        }
    }
    Ok(assignment)
}

/// Scores a column subset by mean stratified k-fold accuracy (in `[0, 1]`) of a linear SVM.
///
/// The fold assignment is drawn once, so every subset is judged on the same splits.
pub struct SvmCriterion<'a> {
    features: &'a FeatureMatrix,
    folds: Vec<(Vec<usize>, Vec<usize>)>,
    targets: Vec<f64>,
    svm: SvmConfig,
}

impl<'a> SvmCriterion<'a> {
    pub fn new(features: &'a FeatureMatrix, cfg: &CriterionConfig, seed: u64) -> Result<Self> {
        let assignment = stratified_folds(features.labels(), cfg.folds, seed)?;
        let folds = (0..cfg.folds)
            .map(|k| {
                let (test, train): (Vec<usize>, Vec<usize>) =
                    (0..assignment.len()).partition(|&i| assignment[i] == k);
                (train, test)
            })
            .collect();
        let targets = features.labels().iter().map(|&l| if l == 1 { 1.0 } else { -1.0 }).collect();
        Ok(Self {
            features,
            folds,
            targets,
            svm: cfg.svm,
        })
    }

    pub fn evaluate(&self, subset: &[usize]) -> Result<f64> {
        if subset.is_empty() {
            return Err(Error::EmptyInput("criterion subset"));
        }
        let cols = self.features.values().select(Axis(1), subset);
        let mut total = 0.0;
        for (train, test) in &self.folds {
            let x_train = cols.select(Axis(0), train);
            let y_train: Vec<f64> = train.iter().map(|&i| self.targets[i]).collect();
            let model = svm_train(x_train.view(), &y_train, self.svm)?;
            let x_test = cols.select(Axis(0), test);
            let pred = svm_predict(&model, x_test.view())?;
            let correct = pred
                .iter()
                .zip(test)
                .filter(|(p, &i)| **p as f64 == self.targets[i])
                .count();
            total += correct as f64 / test.len() as f64;
        }
        Ok(total / self.folds.len() as f64)
    }
}

/// One-shot form of [`SvmCriterion::evaluate`].
pub fn criterion_svm_cv(features: &FeatureMatrix, subset: &[usize], cfg: &CriterionConfig, seed: u64) -> Result<f64> {
    SvmCriterion::new(features, cfg, seed)?.evaluate(subset)
}
