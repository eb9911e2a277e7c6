//! Leave-one-subject-out comparison of the three feature sets on planted synthetic data.
//!
//! `cargo run --release --example synthetic_benchmark -- [effect_size] [seed]`

use std::time::Instant;

use bci_featsel::data::{TaskId, TaskSpec};
use bci_featsel::evaluation::{run_variants, EvalConfig, MlpClassifier, Variant};
use bci_featsel::synthetic::{generate, SyntheticSpec};

fn main() -> bci_featsel::Result<()> {
    let mut args = std::env::args().skip(1);
    let effect_size: f64 = args.next().map_or(2.0, |s| s.parse().expect("effect size"));
    let seed: u64 = args.next().map_or(7, |s| s.parse().expect("seed"));
    let spec = SyntheticSpec {
        effect_size,
        seed,
        ..SyntheticSpec::default()
    };
    let epochs = generate(&spec, true)?;
    let start = Instant::now();
    let reports = run_variants(
        &epochs,
        TaskSpec::new(TaskId::I),
        &Variant::ALL,
        &EvalConfig::default(),
        &MlpClassifier::table2(TaskId::I),
        seed,
    )?;
    for r in &reports {
        let accs: Vec<String> = r.result.per_subject.iter().map(|s| format!("{:.1}", s.accuracy)).collect();
        println!(
            "{:<13} mean {:6.2} std {:5.2}  [{}]  failed {}",
            r.result.variant.to_string(),
            r.result.mean.unwrap_or(f64::NAN),
            r.result.std.unwrap_or(f64::NAN),
            accs.join(", "),
            r.result.failed.len()
        );
        let top: Vec<&str> = r.saliency.ranking().iter().take(3).map(|&c| r.saliency.channel_names[c].as_str()).collect();
        println!("{:<13} top channels {:?} counts {:?}", "", top, r.saliency.counts);
    }
    println!("elapsed {:.1?}", start.elapsed());
    Ok(())
}
