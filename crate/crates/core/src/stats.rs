//! Time-domain statistics per channel.

use ndarray::Array2;
use rayon::prelude::*;

use crate::data::{binary_labels, EpochSet, FeatureDescriptor, FeatureFamily, FeatureMatrix};
use crate::error::{Error, Result};

pub const STAT_NAMES: [&str; 7] = ["mean", "std", "variance", "rms", "abs_diff", "skewness", "kurtosis"];

/// `[mean, std, variance, rms, mean |x[i] - x[i-1]|, skewness, kurtosis]`.
///
/// Population normalization throughout; kurtosis is non-excess (3 for a Gaussian).
/// A zero-variance input reports skewness and kurtosis as 0.
pub fn stat_features(x: &[f64]) -> Result<[f64; 7]> {
    if x.is_empty() {
        return Err(Error::EmptyInput("statistics input"));
    }
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let (mut m2, mut m3, mut m4, mut sq) = (0.0, 0.0, 0.0, 0.0);
    for &v in x {
        let d = v - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
        sq += v * v;
    }
    let var = m2 / n;
    let std = var.sqrt();
    let rms = (sq / n).sqrt();
    let abs_diff = if x.len() > 1 {
        x.windows(2).map(|w| (w[1] - w[0]).abs()).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    let (skew, kurt) = if var > 0.0 {
        (m3 / n / (var * std), m4 / n / (var * var))
    } else {
        (0.0, 0.0)
    };
    Ok([mean, std, var, rms, abs_diff, skew, kurt])
}

/// Seven columns per channel, channel-major.
pub fn stat_feature_block(epochs: &EpochSet) -> Result<FeatureMatrix> {
    let labels = binary_labels(epochs)?;
    let n_ch = epochs.n_channels();
    let rows: Vec<Vec<f64>> = (0..epochs.n_epochs())
        .into_par_iter()
        .map(|e| {
            let mut row = Vec::with_capacity(7 * n_ch);
            for c in 0..n_ch {
                row.extend(stat_features(&epochs.trace_f64(e, c))?);
            }
            Ok(row)
        })
        .collect::<Result<_>>()?;
    let values = Array2::from_shape_fn((rows.len(), 7 * n_ch), |(i, j)| rows[i][j]);
    let descriptors = (0..n_ch)
        .flat_map(|c| {
            STAT_NAMES
                .iter()
                .map(move |name| FeatureDescriptor::new(c, FeatureFamily::Statistical, *name))
        })
        .collect();
    FeatureMatrix::new(values, descriptors, labels, epochs.subjects().to_vec())
}
