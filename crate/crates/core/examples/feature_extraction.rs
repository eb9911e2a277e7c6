//! Extract the full feature matrix from synthetic epochs and save the epoch bundle.
//!
//! `cargo run --example feature_extraction -- [bundle_dir]`

use bci_featsel::data::{load_epoch_bundle, save_epoch_bundle, select_task, FeatureFamily, TaskId, TaskSpec};
use bci_featsel::features::{extract_features, FeatureConfig, FEATURES_PER_CHANNEL};
use bci_featsel::synthetic::{generate, SyntheticSpec};

fn main() -> bci_featsel::Result<()> {
    let spec = SyntheticSpec {
        n_subjects: 2,
        epochs_per_class: 10,
        n_channels: 22,
        planted_channels: vec![7, 11],
        ..SyntheticSpec::default()
    };
    let epochs = generate(&spec, false)?;
    let dir = std::env::args().nth(1).map_or_else(|| std::env::temp_dir().join("bci_featsel_bundle"), Into::into);
    save_epoch_bundle(&epochs, &dir)?;
    let epochs = select_task(&load_epoch_bundle(&dir)?, TaskSpec::new(TaskId::I))?;
    println!("bundle at {}: {} epochs x {} channels", dir.display(), epochs.n_epochs(), epochs.n_channels());

    let (features, models) = extract_features(&epochs, &FeatureConfig::default(), None)?;
    println!("{} rows x {} columns ({FEATURES_PER_CHANNEL} per channel)", features.n_rows(), features.n_features());
    for family in [FeatureFamily::Spectral, FeatureFamily::Wavelet, FeatureFamily::Statistical] {
        let names: Vec<&str> = features
            .descriptors()
            .iter()
            .filter(|d| d.family == family && d.channel_index == 0)
            .map(|d| d.name.as_str())
            .collect();
        println!("{family:<12} {names:?}");
    }
    println!("{} wavelet PCA models fitted", models.models.len());
    Ok(())
}
