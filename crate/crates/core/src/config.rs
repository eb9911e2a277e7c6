//! Flat pipeline configuration: read from TOML, overridden by command-line flags, and
//! echoed into every artifact.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::data::TaskId;
use crate::error::{Error, Result};
use crate::evaluation::{EvalConfig, MlpClassifier, Variant};
use crate::features::FeatureConfig;
use crate::mlp::{MlpConfig, SearchSpace};
use crate::selection::{CriterionConfig, MiConfig, SffsConfig};
use crate::spectral::{BandSet, WelchConfig};
use crate::svm::SvmConfig;
use crate::wavelet::{MorletParams, ScaleGrid};

/// Every key is optional in the file; absent keys take the defaults below.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub bundle: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub tasks: Vec<TaskId>,
    pub variants: Vec<Variant>,

    pub welch_segment_len: usize,
    pub welch_step: usize,
    pub scale_min: f64,
    pub scale_max: f64,
    pub n_scales: usize,
    pub morlet_omega0: f64,

    pub mi_threshold: f64,
    pub mi_bins: usize,
    pub sffs_k_max: usize,
    pub sffs_patience: usize,
    pub sffs_k_min: usize,
    pub criterion_folds: usize,
    pub svm_c: f64,
    pub svm_epochs: usize,

    /// Tune the network per fold by random search instead of using a fixed architecture.
    pub search: bool,
    pub search_trials: usize,
    /// Fixed architecture to use; defaults to the row of the task being run.
    pub table2: Option<TaskId>,
    pub mlp_epochs: usize,
    pub mlp_batch_size: usize,
    pub mlp_learning_rate: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        let mlp = MlpConfig::default();
        let sffs = SffsConfig::default();
        let mi = MiConfig::default();
        let svm = SvmConfig::default();
        Self {
            bundle: None,
            out: None,
            seed: None,
            tasks: vec![TaskId::I],
            variants: Variant::ALL.to_vec(),
            welch_segment_len: 64,
            welch_step: 32,
            scale_min: 1.0,
            scale_max: 128.0,
            n_scales: 6,
            morlet_omega0: MorletParams::default().omega0,
            mi_threshold: mi.threshold,
            mi_bins: mi.n_bins,
            sffs_k_max: sffs.k_max,
            sffs_patience: sffs.patience,
            sffs_k_min: sffs.k_min,
            criterion_folds: CriterionConfig::default().folds,
            svm_c: svm.c,
            svm_epochs: svm.epochs,
            search: false,
            search_trials: SearchSpace::default().n_trials,
            table2: None,
            mlp_epochs: mlp.epochs,
            mlp_batch_size: mlp.batch_size,
            mlp_learning_rate: mlp.learning_rate,
        }
    }
}

impl PipelineConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        if !path.exists() {
            return Err(Error::MissingArtifact(path.to_path_buf()));
        }
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn require_seed(&self) -> Result<u64> {
        self.seed
            .ok_or_else(|| Error::Config("--seed is required for this command".into()))
    }

    pub fn feature_config(&self) -> Result<FeatureConfig> {
        Ok(FeatureConfig {
            welch: WelchConfig::hann(self.welch_segment_len, self.welch_step)?,
            bands: BandSet::default(),
            scales: ScaleGrid::log2(self.scale_min, self.scale_max, self.n_scales)?,
            morlet: MorletParams::new(self.morlet_omega0)?,
        })
    }

    pub fn mi_config(&self) -> MiConfig {
        MiConfig {
            n_bins: self.mi_bins,
            threshold: self.mi_threshold,
        }
    }

    pub fn sffs_config(&self, seed: u64) -> SffsConfig {
        SffsConfig {
            k_max: self.sffs_k_max,
            patience: self.sffs_patience,
            k_min: self.sffs_k_min,
            seed,
        }
    }

    pub fn criterion_config(&self) -> CriterionConfig {
        CriterionConfig {
            folds: self.criterion_folds,
            svm: SvmConfig {
                c: self.svm_c,
                epochs: self.svm_epochs,
            },
        }
    }

    pub fn eval_config(&self) -> Result<EvalConfig> {
        Ok(EvalConfig {
            features: self.feature_config()?,
            mi: self.mi_config(),
            sffs: self.sffs_config(0),
            criterion: self.criterion_config(),
        })
    }

    /// Fixed architecture for `task` (or the `table2` override) with the training knobs applied.
    pub fn mlp_config(&self, task: TaskId, seed: u64) -> MlpConfig {
        MlpConfig {
            epochs: self.mlp_epochs,
            batch_size: self.mlp_batch_size,
            learning_rate: self.mlp_learning_rate,
            seed,
            ..MlpConfig::table2(self.table2.unwrap_or(task))
        }
    }

    pub fn search_space(&self) -> SearchSpace {
        SearchSpace {
            n_trials: self.search_trials,
            epochs: self.mlp_epochs,
            batch_size: self.mlp_batch_size,
            ..SearchSpace::default()
        }
    }

    pub fn classifier(&self, task: TaskId) -> MlpClassifier {
        if self.search {
            MlpClassifier::Search(self.search_space())
        } else {
            MlpClassifier::Fixed(self.mlp_config(task, 0))
        }
    }
}
