//! Morlet continuous wavelet transform and PCA-compressed wavelet features.
//!
//! Scales are expressed in samples: at scale `a` the wavelet oscillates at
//! `omega0 * fs / (2 * pi * a)` Hz. For every (channel, scale) pair the magnitude
//! `|W(a, .)|` over an epoch is one observation; a PCA fitted across training epochs
//! compresses it to its first principal-component score.

use std::f64::consts::PI;

use ndarray::{Array2, Axis};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{binary_labels, EpochSet, FeatureDescriptor, FeatureFamily, FeatureMatrix};
use crate::error::{Error, Result};
use crate::pca::{pca_fit, PcaModel};

/// Envelope level below which the wavelet is treated as zero.
pub const SUPPORT_CUTOFF: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MorletParams {
    pub omega0: f64,
}

impl MorletParams {
    pub fn new(omega0: f64) -> Result<Self> {
        if !(omega0 > 0.0 && omega0.is_finite()) {
            return Err(Error::InvalidParameter(format!("omega0 must be positive, got {omega0}")));
        }
        Ok(Self { omega0 })
    }

    /// Centre frequency in Hz at scale `a` (samples).
    pub fn frequency_at(&self, scale: f64, fs: f64) -> f64 {
        self.omega0 * fs / (2.0 * PI * scale)
    }

    /// Scale (samples) whose centre frequency is `freq` Hz.
    pub fn scale_for(&self, freq: f64, fs: f64) -> f64 {
        self.omega0 * fs / (2.0 * PI * freq)
    }
}

impl Default for MorletParams {
    fn default() -> Self {
        Self { omega0: 6.0 }
    }
}

/// `pi^(-1/4) * exp(i*omega0*t) * exp(-t^2 / 2)`.
pub fn morlet(t: f64, p: MorletParams) -> Complex64 {
    let envelope = PI.powf(-0.25) * (-0.5 * t * t).exp();
    Complex64::from_polar(envelope, p.omega0 * t)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleGrid {
    pub scales: Vec<f64>,
}

impl ScaleGrid {
    pub fn new(scales: Vec<f64>) -> Result<Self> {
        if scales.is_empty() || scales.iter().any(|&s| !(s > 0.0 && s.is_finite())) {
            return Err(Error::InvalidParameter("scales must be positive".into()));
        }
        if scales.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter("scales must be strictly increasing".into()));
        }
        Ok(Self { scales })
    }

    /// `count` scales from `lo` to `hi` with equally spaced base-2 exponents.
    pub fn log2(lo: f64, hi: f64, count: usize) -> Result<Self> {
        if !(lo > 0.0 && hi > lo) || count < 2 {
            return Err(Error::InvalidParameter(format!("log2 grid lo={lo} hi={hi} count={count}")));
        }
        let (e0, e1) = (lo.log2(), hi.log2());
        let scales = (0..count)
            .map(|i| (e0 + (e1 - e0) * i as f64 / (count - 1) as f64).exp2())
            .collect();
        Self::new(scales)
    }

    pub fn len(&self) -> usize {
        self.scales.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scales.is_empty()
    }
}

impl Default for ScaleGrid {
    /// Six scales from 1 to 128.
    fn default() -> Self {
        Self::log2(1.0, 128.0, 6).expect("valid default")
    }
}

/// Half-width (in units of `t/a`) of the region where the envelope exceeds the cutoff.
fn support_halfwidth() -> f64 {
    (-2.0 * SUPPORT_CUTOFF.ln()).sqrt()
}

/// Precomputed `conj(psi(k / a))` for the truncated support of one scale.
struct Kernel {
    half: usize,
    taps: Vec<Complex64>,
    gain: f64,
}

impl Kernel {
    fn new(scale: f64, p: MorletParams, dt: f64, max_half: usize) -> Self {
        let umax = support_halfwidth();
        let half = ((scale * umax).floor() as usize).min(max_half);
        let taps = (0..=2 * half)
            .map(|i| {
                let k = i as f64 - half as f64;
                morlet(k / scale, p).conj()
            })
            .collect();
        Kernel {
            half,
            taps,
            gain: dt / scale.sqrt(),
        }
    }

    fn apply(&self, x: &[f64], out: &mut [Complex64]) {
        let n = x.len() as isize;
        let half = self.half as isize;
        for (b, o) in out.iter_mut().enumerate() {
            let b = b as isize;
            let lo = (b - half).max(0);
            let hi = (b + half).min(n - 1);
            let mut acc = Complex64::new(0.0, 0.0);
            for t in lo..=hi {
                acc += self.taps[(t - b + half) as usize] * x[t as usize];
            }
            *o = acc * self.gain;
        }
    }
}

/// `W(a, b) = a^(-1/2) * sum_t x[t] * conj(psi((t - b) / a)) * dt`, one row per scale.
///
/// Samples outside the signal are zero; terms where the Gaussian envelope is below
/// [`SUPPORT_CUTOFF`] are skipped.
pub fn cwt(signal: &[f64], scales: &ScaleGrid, p: MorletParams, fs: f64) -> Result<Array2<Complex64>> {
    if signal.is_empty() {
        return Err(Error::EmptyInput("cwt signal"));
    }
    let n = signal.len();
    let mut out = Array2::<Complex64>::zeros((scales.len(), n));
    for (row, &a) in out.outer_iter_mut().zip(&scales.scales) {
        let kernel = Kernel::new(a, p, 1.0 / fs, n - 1);
        kernel.apply(signal, row.into_slice().expect("standard layout"));
    }
    Ok(out)
}

/// Fitted PCA per (channel, scale), channel-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveletModels {
    pub n_channels: usize,
    pub n_samples: usize,
    pub scales: ScaleGrid,
    pub morlet: MorletParams,
    pub models: Vec<PcaModel>,
}

/// `|W|` for every epoch, channel and scale as `[channel * n_scales + scale] -> [epoch, sample]`.
fn magnitude_observations(epochs: &EpochSet, scales: &ScaleGrid, p: MorletParams) -> Vec<Array2<f64>> {
    let n_ch = epochs.n_channels();
    let n_s = epochs.n_samples();
    let n_sc = scales.len();
    let dt = 1.0 / epochs.fs();
    let kernels: Vec<Kernel> = scales
        .scales
        .iter()
        .map(|&a| Kernel::new(a, p, dt, n_s.saturating_sub(1)))
        .collect();
    let per_epoch: Vec<Vec<Vec<f64>>> = (0..epochs.n_epochs())
        .into_par_iter()
        .map(|e| {
            let mut buf = vec![Complex64::new(0.0, 0.0); n_s];
            let mut rows = Vec::with_capacity(n_ch * n_sc);
            for c in 0..n_ch {
                let x = epochs.trace_f64(e, c);
                for k in &kernels {
                    k.apply(&x, &mut buf);
                    rows.push(buf.iter().map(|z| z.norm()).collect());
                }
            }
            rows
        })
        .collect();
    (0..n_ch * n_sc)
        .map(|job| Array2::from_shape_fn((per_epoch.len(), n_s), |(e, s)| per_epoch[e][job][s]))
        .collect()
}

/// Six wavelet features per channel (one per scale): first principal-component score of `|W(a, .)|`.
///
/// Without `fitted` the PCA models are fitted on `epochs` (which must then be training
/// epochs); with `fitted` they are only applied.
pub fn wavelet_feature_block(
    epochs: &EpochSet,
    scales: &ScaleGrid,
    p: MorletParams,
    fitted: Option<&WaveletModels>,
) -> Result<(FeatureMatrix, WaveletModels)> {
    let labels = binary_labels(epochs)?;
    let n_ch = epochs.n_channels();
    let n_sc = scales.len();
    if let Some(m) = fitted {
        if m.n_channels != n_ch {
            return Err(Error::DimensionMismatch {
                context: "wavelet model channels",
                expected: m.n_channels,
                found: n_ch,
            });
        }
        if m.n_samples != epochs.n_samples() {
            return Err(Error::DimensionMismatch {
                context: "wavelet model samples",
                expected: m.n_samples,
                found: epochs.n_samples(),
            });
        }
        if m.scales != *scales || m.models.len() != n_ch * n_sc {
            return Err(Error::DimensionMismatch {
                context: "wavelet model scales",
                expected: m.models.len(),
                found: n_ch * n_sc,
            });
        }
    }
    let obs = magnitude_observations(epochs, scales, p);
    let models: Vec<PcaModel> = match fitted {
        Some(m) => m.models.clone(),
        None => obs.par_iter().map(|o| pca_fit(o, 1)).collect::<Result<_>>()?,
    };
    let columns: Vec<Array2<f64>> = obs
        .par_iter()
        .zip(models.par_iter())
        .map(|(o, m)| m.project(o))
        .collect::<Result<_>>()?;
    let views: Vec<_> = columns.iter().map(|c| c.view()).collect();
    let values = ndarray::concatenate(Axis(1), &views).expect("equal row counts");
    let descriptors = (0..n_ch)
        .flat_map(|c| {
            (0..n_sc).map(move |s| FeatureDescriptor::new(c, FeatureFamily::Wavelet, format!("cwt_pc1_scale{}", s + 1)))
        })
        .collect();
    let matrix = FeatureMatrix::new(values, descriptors, labels, epochs.subjects().to_vec())?;
    let models = WaveletModels {
        n_channels: n_ch,
        n_samples: epochs.n_samples(),
        scales: scales.clone(),
        morlet: p,
        models,
    };
    Ok((matrix, models))
}
