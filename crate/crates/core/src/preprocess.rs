//! Band-pass FIR filtering, event-locked segmentation and feature standardization.

use std::f64::consts::PI;

use ndarray::{Array2, Array3, Axis};
use serde::{Deserialize, Serialize};

use crate::data::{EpochSet, FeatureMatrix};
use crate::error::{Error, Result};

/// Linear-phase band-pass FIR filter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FirFilter {
    pub taps: Vec<f64>,
    pub f_lo: f64,
    pub f_hi: f64,
    pub fs: f64,
}

impl FirFilter {
    /// Integer group delay in samples.
    pub fn delay(&self) -> usize {
        (self.taps.len() - 1) / 2
    }

    /// |H(f)| evaluated from the taps.
    pub fn magnitude_at(&self, f: f64) -> f64 {
        let w = 2.0 * PI * f / self.fs;
        let (re, im) = self
            .taps
            .iter()
            .enumerate()
            .fold((0.0, 0.0), |(re, im), (n, &h)| {
                let ph = w * n as f64;
                (re + h * ph.cos(), im - h * ph.sin())
            });
        re.hypot(im)
    }
}

/// Tap count used when the caller does not pick one: about two seconds of signal, odd.
pub fn default_taps(fs: f64) -> usize {
    let n = (2.0 * fs).round() as usize;
    n | 1
}

fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        (PI * x).sin() / (PI * x)
    }
}

/// Hamming-windowed sinc band-pass between `f_lo` and `f_hi` Hz.
///
/// Built as the difference of two low-pass prototypes, each normalized to unit DC gain,
/// so the response at DC is zero up to rounding.
pub fn design_bandpass(f_lo: f64, f_hi: f64, fs: f64, n_taps: usize) -> Result<FirFilter> {
    if !(fs > 0.0 && 0.0 < f_lo && f_lo < f_hi && f_hi < fs / 2.0) {
        return Err(Error::InvalidParameter(format!(
            "band edges must satisfy 0 < f_lo < f_hi < fs/2 (got {f_lo}, {f_hi}, fs={fs})"
        )));
    }
    if n_taps.is_multiple_of(2) || n_taps < 3 {
        return Err(Error::InvalidParameter(format!("n_taps must be odd and >= 3, got {n_taps}")));
    }
    let m = (n_taps - 1) as f64 / 2.0;
    let window: Vec<f64> = (0..n_taps)
        .map(|n| 0.54 - 0.46 * (2.0 * PI * n as f64 / (n_taps - 1) as f64).cos())
        .collect();
    let lowpass = |fc: f64| -> Vec<f64> {
        let c = 2.0 * fc / fs;
        let h: Vec<f64> = (0..n_taps)
            .map(|n| c * sinc(c * (n as f64 - m)) * window[n])
            .collect();
        let dc: f64 = h.iter().sum();
        h.into_iter().map(|v| v / dc).collect()
    };
    let hi = lowpass(f_hi);
    let lo = lowpass(f_lo);
    let mut taps: Vec<f64> = hi.iter().zip(&lo).map(|(a, b)| a - b).collect();
    // force exact symmetry against rounding in the two prototypes
    for i in 0..n_taps / 2 {
        let j = n_taps - 1 - i;
        let avg = 0.5 * (taps[i] + taps[j]);
        taps[i] = avg;
        taps[j] = avg;
    }
    Ok(FirFilter {
        taps,
        f_lo,
        f_hi,
        fs,
    })
}

/// Convolve with the filter and shift by the group delay so output lines up with input.
///
/// Samples outside the signal are treated as zero.
pub fn apply_fir(filter: &FirFilter, signal: &[f64]) -> Result<Vec<f64>> {
    let n_taps = filter.taps.len();
    if signal.len() <= n_taps {
        return Err(Error::SignalTooShort {
            len: signal.len(),
            needed: n_taps,
        });
    }
    let delay = filter.delay() as isize;
    let n = signal.len() as isize;
    let out = (0..n)
        .map(|i| {
            let mut acc = 0.0;
            for (k, &h) in filter.taps.iter().enumerate() {
                let j = i + delay - k as isize;
                if (0..n).contains(&j) {
                    acc += h * signal[j as usize];
                }
            }
            acc
        })
        .collect();
    Ok(out)
}

/// Filter every channel of a `[channel, sample]` recording.
pub fn filter_channels(filter: &FirFilter, continuous: &Array2<f32>) -> Result<Array2<f32>> {
    let mut out = Array2::<f32>::zeros(continuous.dim());
    for (src, mut dst) in continuous.outer_iter().zip(out.outer_iter_mut()) {
        let x: Vec<f64> = src.iter().map(|&v| v as f64).collect();
        let y = apply_fir(filter, &x)?;
        for (d, v) in dst.iter_mut().zip(y) {
            *d = v as f32;
        }
    }
    Ok(out)
}

/// A marker in a continuous recording.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Event {
    pub sample: usize,
    pub class_id: u32,
    pub subject_id: u32,
}

#[derive(Debug, Clone)]
pub struct Segmented {
    pub epochs: EpochSet,
    /// Events whose window fell outside the recording.
    pub skipped: usize,
}

/// Cut `[onset - round(t_pre*fs), onset + round(t_post*fs))` windows around every event.
pub fn segment_epochs(
    continuous: &Array2<f32>,
    channel_names: Vec<String>,
    events: &[Event],
    fs: f64,
    t_pre: f64,
    t_post: f64,
) -> Result<Segmented> {
    if !(t_pre >= 0.0 && t_post > 0.0 && fs > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "window t_pre={t_pre}, t_post={t_post}, fs={fs}"
        )));
    }
    let pre = (t_pre * fs).round() as usize;
    let post = (t_post * fs).round() as usize;
    let width = pre + post;
    let (n_channels, n_total) = continuous.dim();

    let kept: Vec<&Event> = events
        .iter()
        .filter(|e| e.sample >= pre && e.sample + post <= n_total)
        .collect();
    let mut data = Array3::<f32>::zeros((kept.len(), n_channels, width));
    for (mut epoch, ev) in data.outer_iter_mut().zip(&kept) {
        let start = ev.sample - pre;
        epoch.assign(&continuous.slice(ndarray::s![.., start..start + width]));
    }
    let epochs = EpochSet::new(
        data,
        fs,
        channel_names,
        kept.iter().map(|e| e.class_id).collect(),
        kept.iter().map(|e| e.subject_id).collect(),
    )?;
    Ok(Segmented {
        epochs,
        skipped: events.len() - kept.len(),
    })
}

/// Per-column z-scoring fitted on training rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
}

impl Standardizer {
    /// Population mean and standard deviation of every column. Zero-variance columns
    /// store a std of 1 so they map to 0 on the training rows.
    pub fn fit(train: &FeatureMatrix) -> Result<Self> {
        Self::fit_values(train.values())
    }

    pub fn fit_values(values: &Array2<f64>) -> Result<Self> {
        let n = values.nrows();
        if n == 0 {
            return Err(Error::EmptyInput("standardizer training rows"));
        }
        let mut means = Vec::with_capacity(values.ncols());
        let mut stds = Vec::with_capacity(values.ncols());
        for col in values.axis_iter(Axis(1)) {
            let mean = col.sum() / n as f64;
            let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
            let std = var.sqrt();
            means.push(mean);
            stds.push(if std <= 1e-12 * mean.abs().max(1.0) { 1.0 } else { std });
        }
        Ok(Self { means, stds })
    }

    pub fn apply(&self, m: &FeatureMatrix) -> Result<FeatureMatrix> {
        m.with_values(self.apply_values(m.values())?)
    }

    pub fn apply_values(&self, values: &Array2<f64>) -> Result<Array2<f64>> {
        if values.ncols() != self.means.len() {
            return Err(Error::DimensionMismatch {
                context: "standardizer columns",
                expected: self.means.len(),
                found: values.ncols(),
            });
        }
        let mut out = values.clone();
        for (j, mut col) in out.axis_iter_mut(Axis(1)).enumerate() {
            let (mu, sd) = (self.means[j], self.stds[j]);
            col.mapv_inplace(|v| {
                let z = (v - mu) / sd;
                // constant training columns: exact zero for values equal to the mean
                if sd == 1.0 && (v - mu).abs() <= 1e-12 * mu.abs().max(1.0) {
                    0.0
                } else {
                    z
                }
            });
        }
        Ok(out)
    }
}
