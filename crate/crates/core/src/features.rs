//! All three feature families for an epoch set, in one matrix.

use serde::{Deserialize, Serialize};

use crate::data::{EpochSet, FeatureMatrix};
use crate::error::Result;
use crate::spectral::{spectral_feature_block, BandSet, WelchConfig};
use crate::stats::stat_feature_block;
use crate::wavelet::{wavelet_feature_block, MorletParams, ScaleGrid, WaveletModels};

/// Columns per channel: 6 band powers + 6 wavelet scores + 7 statistics.
pub const FEATURES_PER_CHANNEL: usize = 19;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[derive(Default)]
pub struct FeatureConfig {
    pub welch: WelchConfig,
    pub bands: BandSet,
    pub scales: ScaleGrid,
    pub morlet: MorletParams,
}


/// Spectral block, then wavelet block, then statistical block; each channel-major.
///
/// `fitted = None` fits the wavelet PCA models on `epochs`.
pub fn extract_features(
    epochs: &EpochSet,
    cfg: &FeatureConfig,
    fitted: Option<&WaveletModels>,
) -> Result<(FeatureMatrix, WaveletModels)> {
    let spectral = spectral_feature_block(epochs, &cfg.welch, &cfg.bands)?;
    let (wavelet, models) = wavelet_feature_block(epochs, &cfg.scales, cfg.morlet, fitted)?;
    let stats = stat_feature_block(epochs)?;
    Ok((FeatureMatrix::hstack(&[spectral, wavelet, stats])?, models))
}
