//! Plug-in mutual information between a quantile-binned feature and a binary label.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::FeatureMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MiConfig {
    pub n_bins: usize,
    /// Features with MI (nats) strictly above this survive.
    pub threshold: f64,
}

impl Default for MiConfig {
    fn default() -> Self {
        Self {
            n_bins: 16,
            threshold: 0.03,
        }
    }
}

/// Equal-frequency bin index per sample.
///
/// Every distinct value takes the bin of its first rank, `rank * n_bins / n`, so equal
/// values share a bin and the assignment depends only on the ordering of the values.
pub fn quantile_bins(x: &[f64], n_bins: usize) -> Vec<usize> {
    let n = x.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut bins = vec![0; n];
    let mut first_rank = 0;
    for (rank, &i) in order.iter().enumerate() {
        if rank > 0 && x[i] != x[order[rank - 1]] {
            first_rank = rank;
        }
        bins[i] = first_rank * n_bins / n;
    }
    bins
}

/// `I(X;Y)` in nats from the joint histogram of binned `feature` and `labels`.
pub fn estimate_mi(feature: &[f64], labels: &[u8], n_bins: usize) -> Result<f64> {
    let n = feature.len();
    if labels.len() != n {
        return Err(Error::DimensionMismatch {
            context: "mi labels",
            expected: n,
            found: labels.len(),
        });
    }
    if n_bins < 2 {
        return Err(Error::InvalidParameter(format!("n_bins must be >= 2, got {n_bins}")));
    }
    if n < n_bins {
        return Err(Error::InvalidParameter(format!("{n} samples for {n_bins} bins")));
    }
    if let Some(&bad) = labels.iter().find(|&&l| l > 1) {
        return Err(Error::InvalidParameter(format!("label {bad} is not binary")));
    }
    let bins = quantile_bins(feature, n_bins);
    let mut joint = vec![[0usize; 2]; n_bins];
    for (&b, &l) in bins.iter().zip(labels) {
        joint[b][l as usize] += 1;
    }
    let mut label_counts = [0usize; 2];
    for row in &joint {
        label_counts[0] += row[0];
        label_counts[1] += row[1];
    }
    let nf = n as f64;
    let mut mi = 0.0;
    for row in &joint {
        let bin_count = row[0] + row[1];
        for (y, &c) in row.iter().enumerate() {
            if c > 0 {
                let c = c as f64;
                mi += c / nf * (c * nf / (bin_count as f64 * label_counts[y] as f64)).ln();
            }
        }
    }
    Ok(mi.max(0.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct MiFilterResult {
    pub kept: Vec<usize>,
    pub mi_values: Vec<f64>,
}

/// Keep every column whose MI with the labels exceeds the threshold, in column order.
pub fn mi_filter(features: &FeatureMatrix, cfg: &MiConfig) -> Result<MiFilterResult> {
    if features.n_rows() == 0 || features.n_features() == 0 {
        return Err(Error::EmptyInput("mi filter features"));
    }
    if !(cfg.threshold >= 0.0) {
        return Err(Error::InvalidParameter(format!("threshold {}", cfg.threshold)));
    }
    let labels = features.labels();
    let mi_values: Vec<f64> = (0..features.n_features())
        .into_par_iter()
        .map(|j| {
            let col = features.column(j).to_vec();
            estimate_mi(&col, labels, cfg.n_bins)
        })
        .collect::<Result<_>>()?;
    let kept: Vec<usize> = (0..mi_values.len()).filter(|&j| mi_values[j] > cfg.threshold).collect();
    if kept.is_empty() {
        return Err(Error::EmptySelection);
    }
    Ok(MiFilterResult { kept, mi_values })
}
