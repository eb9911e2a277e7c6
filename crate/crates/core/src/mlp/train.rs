use ndarray::{ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::network::{MlpConfig, MlpModel, OptimizerKind};
use super::optim::{adam_step, rmsprop_step, AdamHyper, AdamState, RmsPropHyper, RmsPropState};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub model: MlpModel,
    /// Eval-mode objective on the training set: before training, then after every epoch.
    pub loss_curve: Vec<f64>,
}

enum Optimizer {
    Adam(AdamState, AdamHyper),
    RmsProp(RmsPropState, RmsPropHyper),
}

impl Optimizer {
    fn step(&mut self, params: &mut [f64], grads: &[f64]) -> Result<()> {
        match self {
            Optimizer::Adam(s, h) => adam_step(params, grads, s, h),
            Optimizer::RmsProp(s, h) => rmsprop_step(params, grads, s, h),
        }
    }
}

/// Mini-batch training of a fresh network; shuffling, init and dropout all come from `cfg.seed`.
pub fn train(x: ArrayView2<'_, f64>, y: &[u8], cfg: &MlpConfig) -> Result<TrainOutcome> {
    cfg.validate()?;
    if x.nrows() != y.len() {
        return Err(Error::DimensionMismatch {
            context: "mlp labels",
            expected: x.nrows(),
            found: y.len(),
        });
    }
    if y.iter().any(|&l| l > 1) {
        return Err(Error::InvalidParameter("mlp labels must be 0 or 1".into()));
    }
    if !y.contains(&0) || !y.contains(&1) {
        return Err(Error::SingleClass);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut model = MlpModel::new(x.ncols(), cfg.clone(), &mut rng)?;
    let n_params = model.params.len();
    let mut opt = match cfg.optimizer {
        OptimizerKind::Adam => Optimizer::Adam(AdamState::new(n_params), AdamHyper::new(cfg.learning_rate)),
        OptimizerKind::RmsProp => {
            Optimizer::RmsProp(RmsPropState::new(n_params), RmsPropHyper::new(cfg.learning_rate))
        }
    };
    let targets: Vec<f64> = y.iter().map(|&l| l as f64).collect();
    let mut loss_curve = Vec::with_capacity(cfg.epochs + 1);
    loss_curve.push(model.objective(x, &targets)?);
    let mut order: Vec<usize> = (0..y.len()).collect();
    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(cfg.batch_size) {
            let xb = x.select(Axis(0), batch);
            let yb: Vec<f64> = batch.iter().map(|&i| targets[i]).collect();
            let cache = model.forward_batch(xb.view(), true, &mut rng)?;
            let grads = model.backward(&cache, &yb);
            opt.step(&mut model.params, &grads)?;
        }
        let loss = model.objective(x, &targets)?;
        if !loss.is_finite() || model.params.iter().any(|p| !p.is_finite()) {
            return Err(Error::NonFiniteLoss { epoch });
        }
        loss_curve.push(loss);
    }
    Ok(TrainOutcome { model, loss_curve })
}
