//! Mutual-information filter followed by floating forward search on synthetic features.

use bci_featsel::data::{select_task, TaskId, TaskSpec};
use bci_featsel::features::{extract_features, FeatureConfig};
use bci_featsel::preprocess::Standardizer;
use bci_featsel::selection::{hybrid_select, Action, CriterionConfig, MiConfig, SffsConfig};
use bci_featsel::synthetic::{generate, SyntheticSpec};

fn main() -> bci_featsel::Result<()> {
    let epochs = select_task(&generate(&SyntheticSpec::default(), false)?, TaskSpec::new(TaskId::I))?;
    let (raw, _) = extract_features(&epochs, &FeatureConfig::default(), None)?;
    let features = Standardizer::fit(&raw)?.apply(&raw)?;

    let search = SffsConfig {
        seed: 1,
        ..SffsConfig::default()
    };
    let report = hybrid_select(&features, &MiConfig::default(), &search, &CriterionConfig::default())?;
    println!("{} of {} features pass the MI filter", report.stage1_kept.len(), features.n_features());
    for step in &report.trajectory {
        let sign = if step.action == Action::Include { '+' } else { '-' };
        let d = &features.descriptors()[step.feature];
        println!("  {sign} {:<4} {:<11} {:<10} J = {:.3}", epochs.channel_names()[d.channel_index], d.family.to_string(), d.name, step.j);
    }
    println!("final subset {:?}, J = {:?}", report.final_subset, report.j_final);
    Ok(())
}
