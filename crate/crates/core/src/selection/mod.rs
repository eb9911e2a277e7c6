//! Two-stage feature selection: a mutual-information filter followed by sequential
//! forward floating selection scored by cross-validated linear-SVM accuracy.

mod criterion;
mod mi;
mod sffs;

pub use criterion::{criterion_svm_cv, stratified_folds, CriterionConfig, SvmCriterion};
pub use mi::{estimate_mi, mi_filter, quantile_bins, MiConfig, MiFilterResult};
pub use sffs::{sffs, sfs, Action, SearchOutcome, SffsConfig, TrajectoryStep};

use serde::{Deserialize, Serialize};

use crate::data::FeatureMatrix;
use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionReport {
    pub mi_values: Vec<f64>,
    pub stage1_kept: Vec<usize>,
    pub trajectory: Vec<TrajectoryStep>,
    pub final_subset: Vec<usize>,
    /// Criterion value of `final_subset`; absent when no criterion was evaluated.
    pub j_final: Option<f64>,
}

impl SelectionReport {
    /// Report for the filter alone: the survivors are the final subset.
    pub fn from_filter(filter: MiFilterResult) -> Self {
        SelectionReport {
            final_subset: filter.kept.clone(),
            stage1_kept: filter.kept,
            mi_values: filter.mi_values,
            trajectory: Vec::new(),
            j_final: None,
        }
    }
}

/// Run the filter then floating search on (already standardized) training features.
pub fn hybrid_select(
    features: &FeatureMatrix,
    mi: &MiConfig,
    search: &SffsConfig,
    criterion: &CriterionConfig,
) -> Result<SelectionReport> {
    let filter = mi_filter(features, mi)?;
    if filter.kept.len() < search.k_min.max(2) {
        // too few survivors to search over
        let mut report = SelectionReport::from_filter(filter);
        report.j_final = Some(criterion_svm_cv(features, &report.final_subset, criterion, search.seed)?);
        return Ok(report);
    }
    let scorer = SvmCriterion::new(features, criterion, search.seed)?;
    let outcome = sffs(&filter.kept, |s: &[usize]| scorer.evaluate(s), search)?;
    Ok(SelectionReport {
        mi_values: filter.mi_values,
        stage1_kept: filter.kept,
        trajectory: outcome.trajectory,
        final_subset: outcome.final_subset,
        j_final: Some(outcome.j_final),
    })
}
