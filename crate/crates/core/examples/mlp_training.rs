//! Train the fixed architecture for task I, then let random search pick one.

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use bci_featsel::data::TaskId;
use bci_featsel::mlp::{random_search, train, MlpConfig, SearchSpace};

fn main() -> bci_featsel::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let n = 300;
    // the class is the sign of the product of the first two features
    let x = Array2::from_shape_fn((n, 6), |_| rng.sample::<f64, _>(StandardNormal));
    let y: Vec<u8> = (0..n).map(|i| u8::from(x[[i, 0]] * x[[i, 1]] > 0.0)).collect();

    let cfg = MlpConfig::table2(TaskId::I);
    let out = train(x.view(), &y, &cfg)?;
    let acc = out.model.predict(x.view())?.iter().zip(&y).filter(|(p, t)| p == t).count();
    println!("fixed {:?}", cfg.hidden.iter().map(|h| h.units).collect::<Vec<_>>());
    println!("  loss {:.4} -> {:.4}, training accuracy {acc}/{n}", out.loss_curve[0], out.loss_curve.last().unwrap());

    let space = SearchSpace {
        n_trials: 12,
        epochs: 100,
        ..SearchSpace::default()
    };
    let search = random_search(x.view(), &y, &space, 4)?;
    println!("search best trial {}: {:?}", search.best_trial, search.best.hidden);
    for t in search.leaderboard.iter().take(5) {
        println!("  trial {:>2} holdout {:?}", t.trial, t.holdout_accuracy);
    }
    Ok(())
}
