//! Drive every command of the binary through the library and reload the trained network.
//!
//! Equivalent to `bci-featsel gen-synthetic ...` followed by `bci-featsel pipeline ...`.

use bci_featsel::cli::{cmd_gen_synthetic, cmd_pipeline, load_model, GenArgs};
use bci_featsel::config::PipelineConfig;
use bci_featsel::data::load_epoch_bundle;
use bci_featsel::features::extract_features;

fn main() -> bci_featsel::Result<()> {
    let root = std::env::temp_dir().join("bci_featsel_pipeline");
    let bundle = root.join("bundle");
    cmd_gen_synthetic(&GenArgs {
        out: bundle.clone(),
        seed: Some(3),
        subjects: 3,
        epochs_per_class: 30,
        channels: 6,
        samples: 175,
        fs: 250.0,
        planted: vec![1, 4],
        band: vec![8.0, 13.0],
        effect_size: 2.0,
        noise: 1.0,
        gain_jitter: 1.25,
        force: false,
    })?;
    let cfg = PipelineConfig {
        bundle: Some(bundle.clone()),
        out: Some(root.join("run")),
        seed: Some(3),
        mlp_epochs: 100,
        ..PipelineConfig::default()
    };
    for path in cmd_pipeline(&cfg)?.outputs {
        println!("wrote {}", path.display());
    }

    let task_dir = root.join("run").join("task_I");
    let (art, model) = load_model(&task_dir)?;
    let epochs = load_epoch_bundle(&bundle)?;
    let (features, _) = extract_features(&epochs, &cfg.feature_config()?, None)?;
    let x = art.standardizer.apply(&features.select_columns(&art.feature_columns))?;
    let pred = model.predict(x.values().view())?;
    let correct = pred.iter().zip(x.labels()).filter(|(p, t)| p == t).count();
    println!("reloaded {:?} network on {} columns: {correct}/{} correct", model.layer_dims, art.feature_columns.len(), pred.len());
    Ok(())
}
