//! The seven time-domain statistics of a skewed signal.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};

use bci_featsel::stats::{stat_features, STAT_NAMES};

fn main() -> bci_featsel::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let exp = Exp::new(1.0).unwrap();
    let x: Vec<f64> = (0..175).map(|_| exp.sample(&mut rng)).collect();
    for (name, v) in STAT_NAMES.iter().zip(stat_features(&x)?) {
        println!("{name:<9} {v:8.4}");
    }
    println!("(an exponential has skewness 2 and kurtosis 9)");
    Ok(())
}
