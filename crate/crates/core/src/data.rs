//! Epoch containers, task pairs, and feature matrices.
//!
//! An [`EpochSet`] holds event-locked multi-channel windows `[epoch, channel, sample]`
//! together with per-epoch class and subject ids. Epoch sets are stored on disk as an
//! *epoch bundle*: a directory with a `manifest.json` and a raw `data.bin` of
//! little-endian `f32` samples in epoch, channel, sample order.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use ndarray::{Array2, Array3, ArrayView1, Axis};
use serde::{Deserialize, Serialize};

use crate::artifact::{self, SCHEMA_VERSION};
use crate::error::{Error, Result};

pub const LEFT_HAND: u32 = 0;
pub const RIGHT_HAND: u32 = 1;
pub const FEET: u32 = 2;
pub const TONGUE: u32 = 3;

pub const MANIFEST_FILE: &str = "manifest.json";
pub const DATA_FILE: &str = "data.bin";

/// Multi-channel epochs with sampling rate, class labels and subject ids.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochSet {
    data: Array3<f32>,
    fs: f64,
    channel_names: Vec<String>,
    labels: Vec<u32>,
    subjects: Vec<u32>,
}

impl EpochSet {
    pub fn new(
        data: Array3<f32>,
        fs: f64,
        channel_names: Vec<String>,
        labels: Vec<u32>,
        subjects: Vec<u32>,
    ) -> Result<Self> {
        let (n_epochs, n_channels, _) = data.dim();
        if !(fs.is_finite() && fs > 0.0) {
            return Err(Error::InvalidParameter(format!("sampling rate {fs}")));
        }
        if labels.len() != n_epochs {
            return Err(Error::DimensionMismatch {
                context: "labels",
                expected: n_epochs,
                found: labels.len(),
            });
        }
        if subjects.len() != n_epochs {
            return Err(Error::DimensionMismatch {
                context: "subjects",
                expected: n_epochs,
                found: subjects.len(),
            });
        }
        if channel_names.len() != n_channels {
            return Err(Error::DimensionMismatch {
                context: "channel names",
                expected: n_channels,
                found: channel_names.len(),
            });
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("epoch data at flat index {pos}")));
        }
        Ok(Self {
            data,
            fs,
            channel_names,
            labels,
            subjects,
        })
    }

    pub fn data(&self) -> &Array3<f32> {
        &self.data
    }

    pub fn fs(&self) -> f64 {
        self.fs
    }

    pub fn channel_names(&self) -> &[String] {
        &self.channel_names
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn subjects(&self) -> &[u32] {
        &self.subjects
    }

    pub fn n_epochs(&self) -> usize {
        self.data.dim().0
    }

    pub fn n_channels(&self) -> usize {
        self.data.dim().1
    }

    pub fn n_samples(&self) -> usize {
        self.data.dim().2
    }

    /// One channel of one epoch.
    pub fn trace(&self, epoch: usize, channel: usize) -> ArrayView1<'_, f32> {
        self.data.index_axis(Axis(0), epoch).index_axis_move(Axis(0), channel)
    }

    /// One channel of one epoch widened to `f64`.
    pub fn trace_f64(&self, epoch: usize, channel: usize) -> Vec<f64> {
        self.trace(epoch, channel).iter().map(|&v| v as f64).collect()
    }

    /// New set containing the given epochs, in the given order.
    pub fn subset(&self, indices: &[usize]) -> EpochSet {
        EpochSet {
            data: self.data.select(Axis(0), indices),
            fs: self.fs,
            channel_names: self.channel_names.clone(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            subjects: indices.iter().map(|&i| self.subjects[i]).collect(),
        }
    }

    /// Sorted distinct subject ids.
    pub fn subject_ids(&self) -> Vec<u32> {
        let mut ids = self.subjects.clone();
        ids.sort_unstable();
        ids.dedup();
        ids
    }
}

/// The six pairwise motor-imagery tasks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TaskId {
    I,
    II,
    III,
    IV,
    V,
    VI,
}

impl TaskId {
    pub const ALL: [TaskId; 6] = [TaskId::I, TaskId::II, TaskId::III, TaskId::IV, TaskId::V, TaskId::VI];

    /// Zero-based position in `ALL`.
    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for TaskId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            TaskId::I => "I",
            TaskId::II => "II",
            TaskId::III => "III",
            TaskId::IV => "IV",
            TaskId::V => "V",
            TaskId::VI => "VI",
        };
        f.write_str(s)
    }
}

impl FromStr for TaskId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "I" | "1" => Ok(TaskId::I),
            "II" | "2" => Ok(TaskId::II),
            "III" | "3" => Ok(TaskId::III),
            "IV" | "4" => Ok(TaskId::IV),
            "V" | "5" => Ok(TaskId::V),
            "VI" | "6" => Ok(TaskId::VI),
            other => Err(Error::InvalidParameter(format!("unknown task '{other}'"))),
        }
    }
}

/// A binary task: epochs of `class_a` become label 0, `class_b` label 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskSpec {
    pub task_id: TaskId,
    pub class_a: u32,
    pub class_b: u32,
}

impl TaskSpec {
    pub fn new(task_id: TaskId) -> Self {
        let (class_a, class_b) = match task_id {
            TaskId::I => (LEFT_HAND, RIGHT_HAND),
            TaskId::II => (LEFT_HAND, FEET),
            TaskId::III => (LEFT_HAND, TONGUE),
            TaskId::IV => (RIGHT_HAND, FEET),
            TaskId::V => (RIGHT_HAND, TONGUE),
            TaskId::VI => (FEET, TONGUE),
        };
        Self {
            task_id,
            class_a,
            class_b,
        }
    }
}

impl From<TaskId> for TaskSpec {
    fn from(id: TaskId) -> Self {
        TaskSpec::new(id)
    }
}

/// Keep only the two classes of `task`, relabelled `class_a -> 0`, `class_b -> 1`.
pub fn select_task(epochs: &EpochSet, task: TaskSpec) -> Result<EpochSet> {
    let keep: Vec<usize> = (0..epochs.n_epochs())
        .filter(|&i| {
            let l = epochs.labels[i];
            l == task.class_a || l == task.class_b
        })
        .collect();
    for class in [task.class_a, task.class_b] {
        if !keep.iter().any(|&i| epochs.labels[i] == class) {
            return Err(Error::EmptyClass(class));
        }
    }
    let mut out = epochs.subset(&keep);
    for l in out.labels.iter_mut() {
        *l = if *l == task.class_a { 0 } else { 1 };
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
struct BundleManifest {
    #[serde(default = "artifact::current_schema")]
    schema_version: u32,
    n_epochs: usize,
    n_channels: usize,
    n_samples: usize,
    fs_hz: f64,
    channel_names: Vec<String>,
    labels: Vec<u32>,
    subjects: Vec<u32>,
    dtype: String,
    order: String,
}

/// Write `epochs` as a bundle directory (created if absent).
pub fn save_epoch_bundle(epochs: &EpochSet, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    let (n_epochs, n_channels, n_samples) = epochs.data.dim();
    let manifest = BundleManifest {
        schema_version: SCHEMA_VERSION,
        n_epochs,
        n_channels,
        n_samples,
        fs_hz: epochs.fs,
        channel_names: epochs.channel_names.clone(),
        labels: epochs.labels.clone(),
        subjects: epochs.subjects.clone(),
        dtype: "f32le".into(),
        order: "epoch,channel,sample".into(),
    };
    let mut bytes = Vec::with_capacity(epochs.data.len() * 4);
    // iter() walks a standard-layout array in logical (epoch, channel, sample) order
    for v in epochs.data.iter() {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    artifact::write_atomic(dir.join(DATA_FILE), &bytes)?;
    artifact::write_json(dir.join(MANIFEST_FILE), &manifest)
}

/// Read a bundle directory written by [`save_epoch_bundle`] (or converted externally).
pub fn load_epoch_bundle(dir: impl AsRef<Path>) -> Result<EpochSet> {
    let dir = dir.as_ref();
    let manifest_path = dir.join(MANIFEST_FILE);
    if !manifest_path.exists() {
        return Err(Error::MissingArtifact(manifest_path));
    }
    let text = fs::read_to_string(&manifest_path)?;
    let m: BundleManifest =
        serde_json::from_str(&text).map_err(|e| Error::Manifest(e.to_string()))?;
    artifact::check_schema(m.schema_version)?;
    if m.dtype != "f32le" {
        return Err(Error::Manifest(format!("unsupported dtype '{}'", m.dtype)));
    }
    if m.order.replace(' ', "") != "epoch,channel,sample" {
        return Err(Error::Manifest(format!("unsupported order '{}'", m.order)));
    }
    let data_path = dir.join(DATA_FILE);
    if !data_path.exists() {
        return Err(Error::MissingArtifact(data_path));
    }
    let bytes = fs::read(&data_path)?;
    let n_values = m
        .n_epochs
        .checked_mul(m.n_channels)
        .and_then(|v| v.checked_mul(m.n_samples))
        .ok_or_else(|| Error::Manifest("dimensions overflow".into()))?;
    if bytes.len() != n_values * 4 {
        return Err(Error::DimensionMismatch {
            context: "data.bin byte count",
            expected: n_values * 4,
            found: bytes.len(),
        });
    }
    let values: Vec<f32> = bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect();
    let data = Array3::from_shape_vec((m.n_epochs, m.n_channels, m.n_samples), values)
        .map_err(|e| Error::Manifest(e.to_string()))?;
    EpochSet::new(data, m.fs_hz, m.channel_names, m.labels, m.subjects)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureFamily {
    Spectral,
    Wavelet,
    Statistical,
}

impl fmt::Display for FeatureFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FeatureFamily::Spectral => "spectral",
            FeatureFamily::Wavelet => "wavelet",
            FeatureFamily::Statistical => "statistical",
        })
    }
}

/// Identifies one feature column: which channel it came from and what it measures.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FeatureDescriptor {
    pub channel_index: usize,
    pub family: FeatureFamily,
    pub name: String,
}

impl FeatureDescriptor {
    pub fn new(channel_index: usize, family: FeatureFamily, name: impl Into<String>) -> Self {
        Self {
            channel_index,
            family,
            name: name.into(),
        }
    }
}

/// Tabular features `[epoch, feature]` with binary labels and per-row subject ids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    values: Array2<f64>,
    descriptors: Vec<FeatureDescriptor>,
    labels: Vec<u8>,
    subjects: Vec<u32>,
}

impl FeatureMatrix {
    pub fn new(
        values: Array2<f64>,
        descriptors: Vec<FeatureDescriptor>,
        labels: Vec<u8>,
        subjects: Vec<u32>,
    ) -> Result<Self> {
        let (rows, cols) = values.dim();
        if descriptors.len() != cols {
            return Err(Error::DimensionMismatch {
                context: "feature descriptors",
                expected: cols,
                found: descriptors.len(),
            });
        }
        if labels.len() != rows {
            return Err(Error::DimensionMismatch {
                context: "feature labels",
                expected: rows,
                found: labels.len(),
            });
        }
        if subjects.len() != rows {
            return Err(Error::DimensionMismatch {
                context: "feature subjects",
                expected: rows,
                found: subjects.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("feature matrix".into()));
        }
        Ok(Self {
            values,
            descriptors,
            labels,
            subjects,
        })
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn descriptors(&self) -> &[FeatureDescriptor] {
        &self.descriptors
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn subjects(&self) -> &[u32] {
        &self.subjects
    }

    pub fn n_rows(&self) -> usize {
        self.values.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.values.ncols()
    }

    pub fn column(&self, j: usize) -> ArrayView1<'_, f64> {
        self.values.column(j)
    }

    pub fn select_columns(&self, cols: &[usize]) -> FeatureMatrix {
        FeatureMatrix {
            values: self.values.select(Axis(1), cols),
            descriptors: cols.iter().map(|&c| self.descriptors[c].clone()).collect(),
            labels: self.labels.clone(),
            subjects: self.subjects.clone(),
        }
    }

    pub fn select_rows(&self, rows: &[usize]) -> FeatureMatrix {
        FeatureMatrix {
            values: self.values.select(Axis(0), rows),
            descriptors: self.descriptors.clone(),
            labels: rows.iter().map(|&r| self.labels[r]).collect(),
            subjects: rows.iter().map(|&r| self.subjects[r]).collect(),
        }
    }

    /// Replace the values, keeping descriptors, labels and subjects.
    pub fn with_values(&self, values: Array2<f64>) -> Result<FeatureMatrix> {
        FeatureMatrix::new(
            values,
            self.descriptors.clone(),
            self.labels.clone(),
            self.subjects.clone(),
        )
    }

    /// Concatenate column blocks that describe the same rows.
    pub fn hstack(blocks: &[FeatureMatrix]) -> Result<FeatureMatrix> {
        let first = blocks.first().ok_or(Error::EmptyInput("feature blocks"))?;
        for b in &blocks[1..] {
            if b.labels != first.labels || b.subjects != first.subjects {
                return Err(Error::DimensionMismatch {
                    context: "feature block rows",
                    expected: first.n_rows(),
                    found: b.n_rows(),
                });
            }
        }
        let views: Vec<_> = blocks.iter().map(|b| b.values.view()).collect();
        let values = ndarray::concatenate(Axis(1), &views).map_err(|_| Error::DimensionMismatch {
            context: "feature block rows",
            expected: first.n_rows(),
            found: 0,
        })?;
        let descriptors = blocks.iter().flat_map(|b| b.descriptors.iter().cloned()).collect();
        Ok(FeatureMatrix {
            values,
            descriptors,
            labels: first.labels.clone(),
            subjects: first.subjects.clone(),
        })
    }
}

/// Binary labels for a two-class epoch set; errors if any label is not 0 or 1.
pub fn binary_labels(epochs: &EpochSet) -> Result<Vec<u8>> {
    epochs
        .labels()
        .iter()
        .map(|&l| match l {
            0 => Ok(0),
            1 => Ok(1),
            other => Err(Error::InvalidParameter(format!(
                "label {other} is not binary; apply select_task first"
            ))),
        })
        .collect()
}
