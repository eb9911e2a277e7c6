//! Dense binary classifier trained with mini-batch Adam or RMSprop, plus random search
//! over its architecture.

mod network;
mod optim;
mod search;
mod train;

pub use network::{bce_loss, Activation, ForwardCache, HiddenLayer, MlpConfig, MlpModel, OptimizerKind, BCE_EPS, LEAKY_SLOPE};
pub use optim::{adam_step, rmsprop_step, AdamHyper, AdamState, RmsPropHyper, RmsPropState};
pub use search::{holdout_split, random_search, RandomSearchOutcome, SearchSpace, TrialRecord};
pub use train::{train, TrainOutcome};
