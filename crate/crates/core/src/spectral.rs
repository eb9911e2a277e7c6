//! Welch power spectral density and EEG band powers.

use std::f64::consts::PI;
use std::sync::Arc;

use ndarray::Array2;
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::data::{binary_labels, EpochSet, FeatureDescriptor, FeatureFamily, FeatureMatrix};
use crate::error::{Error, Result};

/// Segment length, hop between segment starts, and the taper applied to each segment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WelchConfig {
    pub segment_len: usize,
    pub step: usize,
    pub window: Vec<f64>,
}

impl WelchConfig {
    pub fn new(segment_len: usize, step: usize, window: Vec<f64>) -> Result<Self> {
        if segment_len == 0 || step == 0 || step > segment_len {
            return Err(Error::InvalidParameter(format!(
                "welch needs 0 < step <= segment_len (got step={step}, L={segment_len})"
            )));
        }
        if window.len() != segment_len {
            return Err(Error::DimensionMismatch {
                context: "welch window",
                expected: segment_len,
                found: window.len(),
            });
        }
        if window.iter().map(|w| w * w).sum::<f64>() <= 0.0 {
            return Err(Error::InvalidParameter("window has zero energy".into()));
        }
        Ok(Self {
            segment_len,
            step,
            window,
        })
    }

    /// Periodic Hann taper.
    pub fn hann(segment_len: usize, step: usize) -> Result<Self> {
        let window = (0..segment_len)
            .map(|n| 0.5 - 0.5 * (2.0 * PI * n as f64 / segment_len as f64).cos())
            .collect();
        Self::new(segment_len, step, window)
    }

    pub fn rectangular(segment_len: usize, step: usize) -> Result<Self> {
        Self::new(segment_len, step, vec![1.0; segment_len])
    }

    /// Number of whole segments that fit in `n` samples.
    pub fn n_segments(&self, n: usize) -> usize {
        if n < self.segment_len {
            0
        } else {
            (n - self.segment_len) / self.step + 1
        }
    }
}

impl Default for WelchConfig {
    /// 64-sample Hann segments with 50% overlap.
    fn default() -> Self {
        Self::hann(64, 32).expect("valid default")
    }
}

/// One-sided spectrum: `freqs[k] = k * fs / L` for `k = 0..=L/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct Psd {
    pub freqs: Vec<f64>,
    pub power: Vec<f64>,
}

/// Welch estimator with a cached FFT plan.
pub struct Welch {
    cfg: WelchConfig,
    fft: Arc<dyn Fft<f64>>,
    norm: f64,
}

impl Welch {
    pub fn new(cfg: WelchConfig) -> Self {
        let fft = FftPlanner::new().plan_fft_forward(cfg.segment_len);
        let energy: f64 = cfg.window.iter().map(|w| w * w).sum();
        let norm = 1.0 / (cfg.segment_len as f64 * energy);
        Self { cfg, fft, norm }
    }

    pub fn config(&self) -> &WelchConfig {
        &self.cfg
    }

    /// Average of the windowed segment periodograms, each scaled by `1 / (L * sum(w^2))`.
    pub fn psd(&self, signal: &[f64], fs: f64) -> Result<Psd> {
        let l = self.cfg.segment_len;
        let k = self.cfg.n_segments(signal.len());
        if k == 0 {
            return Err(Error::SignalTooShort {
                len: signal.len(),
                needed: l - 1,
            });
        }
        let n_bins = l / 2 + 1;
        let mut acc = vec![0.0; n_bins];
        let mut buf = vec![Complex64::new(0.0, 0.0); l];
        for seg in 0..k {
            let start = seg * self.cfg.step;
            for ((b, &x), &w) in buf.iter_mut().zip(&signal[start..start + l]).zip(&self.cfg.window) {
                *b = Complex64::new(x * w, 0.0);
            }
            self.fft.process(&mut buf);
            for (a, b) in acc.iter_mut().zip(&buf) {
                *a += b.norm_sqr();
            }
        }
        let scale = self.norm / k as f64;
        let power = acc.into_iter().map(|v| v * scale).collect();
        let freqs = (0..n_bins).map(|i| i as f64 * fs / l as f64).collect();
        Ok(Psd { freqs, power })
    }
}

pub fn welch_psd(signal: &[f64], cfg: &WelchConfig, fs: f64) -> Result<Psd> {
    Welch::new(cfg.clone()).psd(signal, fs)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub name: String,
    pub f_lo: f64,
    pub f_hi: f64,
    /// Also take the bin closest to `f_lo` when coarse resolution leaves it below the band.
    #[serde(default)]
    pub claim_nearest_lo: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandSet {
    pub bands: Vec<Band>,
}

impl Default for BandSet {
    fn default() -> Self {
        let b = |name: &str, f_lo, f_hi, claim| Band {
            name: name.into(),
            f_lo,
            f_hi,
            claim_nearest_lo: claim,
        };
        BandSet {
            bands: vec![
                b("delta", 0.5, 4.0, true),
                b("theta", 4.0, 8.0, false),
                b("alpha", 8.0, 13.0, false),
                b("low_beta", 13.0, 20.0, false),
                b("mid_beta", 20.0, 26.0, false),
                b("high_beta", 26.0, 35.0, false),
            ],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BandPowers {
    pub powers: Vec<f64>,
    /// `true` where no bin fell inside the band; that band's power is 0.
    pub empty: Vec<bool>,
}

/// Sum PSD bins over half-open `[f_lo, f_hi)` bands.
pub fn band_powers(freqs: &[f64], psd: &[f64], bands: &BandSet) -> Result<BandPowers> {
    if freqs.len() != psd.len() {
        return Err(Error::DimensionMismatch {
            context: "psd bins",
            expected: freqs.len(),
            found: psd.len(),
        });
    }
    if freqs.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("frequencies must be ascending".into()));
    }
    let mut powers = Vec::with_capacity(bands.bands.len());
    let mut empty = Vec::with_capacity(bands.bands.len());
    for band in &bands.bands {
        let mut bins: Vec<usize> = (0..freqs.len())
            .filter(|&i| band.f_lo <= freqs[i] && freqs[i] < band.f_hi)
            .collect();
        if band.claim_nearest_lo && !freqs.is_empty() {
            let nearest = (0..freqs.len())
                .min_by(|&a, &b| {
                    (freqs[a] - band.f_lo)
                        .abs()
                        .total_cmp(&(freqs[b] - band.f_lo).abs())
                })
                .unwrap();
            if freqs[nearest] < band.f_lo {
                bins.insert(0, nearest);
            }
        }
        empty.push(bins.is_empty());
        powers.push(bins.iter().map(|&i| psd[i]).sum());
    }
    Ok(BandPowers { powers, empty })
}

/// Six band powers per channel, channel-major: `[ch0 delta..high_beta, ch1 ...]`.
pub fn spectral_feature_block(epochs: &EpochSet, cfg: &WelchConfig, bands: &BandSet) -> Result<FeatureMatrix> {
    let labels = binary_labels(epochs)?;
    let n_ch = epochs.n_channels();
    let n_b = bands.bands.len();
    let welch = Welch::new(cfg.clone());
    let rows: Vec<Vec<f64>> = (0..epochs.n_epochs())
        .into_par_iter()
        .map(|e| {
            let mut row = Vec::with_capacity(n_ch * n_b);
            for c in 0..n_ch {
                let psd = welch.psd(&epochs.trace_f64(e, c), epochs.fs())?;
                row.extend(band_powers(&psd.freqs, &psd.power, bands)?.powers);
            }
            Ok(row)
        })
        .collect::<Result<_>>()?;
    let values = Array2::from_shape_fn((rows.len(), n_ch * n_b), |(i, j)| rows[i][j]);
    let descriptors = (0..n_ch)
        .flat_map(|c| {
            bands
                .bands
                .iter()
                .map(move |b| FeatureDescriptor::new(c, FeatureFamily::Spectral, format!("{}_power", b.name)))
        })
        .collect();
    FeatureMatrix::new(values, descriptors, labels, epochs.subjects().to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array3;

    /// Direct O(L^2) evaluation of the segment/window/periodogram/average recipe.
    fn naive_welch(x: &[f64], l: usize, d: usize, w: &[f64]) -> Vec<f64> {
        let k = (x.len() - l) / d + 1;
        let energy: f64 = w.iter().map(|v| v * v).sum();
        (0..=l / 2)
            .map(|f| {
                let mut total = 0.0;
                for seg in 0..k {
                    let (mut re, mut im) = (0.0, 0.0);
                    for n in 0..l {
                        let v = x[n + seg * d] * w[n];
                        let ph = -2.0 * PI * (f * n) as f64 / l as f64;
                        re += v * ph.cos();
                        im += v * ph.sin();
                    }
                    total += (re * re + im * im) / (l as f64 * energy);
                }
                total / k as f64
            })
            .collect()
    }

    fn tone(f: f64, fs: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| (2.0 * PI * f * i as f64 / fs).sin()).collect()
    }

    #[test]
    fn zero_signal_has_zero_psd() {
        let p = welch_psd(&[0.0; 175], &WelchConfig::default(), 250.0).unwrap();
        assert_eq!(p.power.len(), 33);
        assert!(p.power.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn single_rectangular_segment_is_the_periodogram() {
        let x: Vec<f64> = (0..64).map(|i| ((i * 7919) % 13) as f64 - 6.0).collect();
        let cfg = WelchConfig::rectangular(64, 64).unwrap();
        let p = welch_psd(&x, &cfg, 250.0).unwrap();
        let oracle = naive_welch(&x, 64, 64, &cfg.window);
        for (a, b) in p.power.iter().zip(oracle) {
            assert!((a - b).abs() <= 1e-9 * b.abs().max(1e-12));
        }
    }

    #[test]
    fn ten_hz_tone_peaks_at_nearest_bin_and_matches_oracle() {
        let x = tone(10.0, 250.0, 175);
        let cfg = WelchConfig::default();
        let p = welch_psd(&x, &cfg, 250.0).unwrap();
        let argmax = (0..p.power.len()).max_by(|&a, &b| p.power[a].total_cmp(&p.power[b])).unwrap();
        let nearest = (0..p.freqs.len())
            .min_by(|&a, &b| (p.freqs[a] - 10.0).abs().total_cmp(&(p.freqs[b] - 10.0).abs()))
            .unwrap();
        assert_eq!(argmax, nearest);
        let oracle = naive_welch(&x, 64, 32, &cfg.window);
        let peak = oracle.iter().cloned().fold(0.0, f64::max);
        for (a, b) in p.power.iter().zip(&oracle) {
            assert!((a - b).abs() <= 1e-9 * peak);
        }
    }

    #[test]
    fn too_short_signal_errors() {
        assert!(welch_psd(&[1.0; 63], &WelchConfig::default(), 250.0).is_err());
        assert!(WelchConfig::hann(64, 65).is_err());
        assert!(WelchConfig::new(4, 2, vec![0.0; 4]).is_err());
    }

    #[test]
    fn band_assignment_is_half_open() {
        let freqs: Vec<f64> = (0..=32).map(|k| k as f64 * 250.0 / 64.0).collect();
        let mut psd = vec![0.0; freqs.len()];
        psd[8] = 1.0; // 31.25 Hz
        let bp = band_powers(&freqs, &psd, &BandSet::default()).unwrap();
        assert_eq!(bp.powers, vec![0.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
        let zero = band_powers(&freqs, &vec![0.0; freqs.len()], &BandSet::default()).unwrap();
        assert_eq!(zero.powers, vec![0.0; 6]);
        assert!(zero.empty.iter().all(|e| !e));
    }

    #[test]
    fn delta_claims_the_bin_nearest_half_hertz() {
        let freqs: Vec<f64> = (0..=32).map(|k| k as f64 * 250.0 / 64.0).collect();
        let mut psd = vec![0.0; freqs.len()];
        psd[0] = 2.0;
        psd[1] = 3.0;
        let bp = band_powers(&freqs, &psd, &BandSet::default()).unwrap();
        assert_eq!(bp.powers[0], 5.0);
    }

    #[test]
    fn unresolvable_band_is_flagged() {
        let freqs = vec![0.0, 10.0, 20.0];
        let bp = band_powers(&freqs, &[1.0, 1.0, 1.0], &BandSet::default()).unwrap();
        // theta, low beta [13,20) and high beta have no bins
        assert_eq!(bp.empty, vec![false, true, false, true, false, true]);
        assert_eq!(bp.powers[1], 0.0);
    }

    #[test]
    fn ten_hz_tone_lands_in_alpha() {
        let bands = BandSet::default();
        // default resolution: alpha is the strongest band
        let p = welch_psd(&tone(10.0, 250.0, 175), &WelchConfig::default(), 250.0).unwrap();
        let bp = band_powers(&p.freqs, &p.power, &bands).unwrap();
        let best = (0..6).max_by(|&a, &b| bp.powers[a].total_cmp(&bp.powers[b])).unwrap();
        assert_eq!(best, 2);
        // 1 Hz resolution: alpha holds more than 90% of the in-band power
        let cfg = WelchConfig::hann(250, 125).unwrap();
        let p = welch_psd(&tone(10.0, 250.0, 1000), &cfg, 250.0).unwrap();
        let bp = band_powers(&p.freqs, &p.power, &bands).unwrap();
        let total: f64 = bp.powers.iter().sum();
        assert!(bp.powers[2] > 0.9 * total);
    }

    fn epochs_with(n_ch: usize, n_ep: usize) -> EpochSet {
        let data = Array3::from_shape_fn((n_ep, n_ch, 175), |(e, c, s)| {
            ((s as f64 * 0.3 * (c + 1) as f64).sin() * (e + 1) as f64) as f32
        });
        EpochSet::new(
            data,
            250.0,
            (0..n_ch).map(|c| format!("C{c}")).collect(),
            (0..n_ep as u32).map(|i| i % 2).collect(),
            vec![0; n_ep],
        )
        .unwrap()
    }

    #[test]
    fn block_has_six_columns_per_channel() {
        let m = spectral_feature_block(&epochs_with(22, 1), &WelchConfig::default(), &BandSet::default()).unwrap();
        assert_eq!(m.n_features(), 132);
        assert_eq!(m.n_rows(), 1);
        assert_eq!(m.descriptors()[8].name, "alpha_power");
        assert_eq!(m.descriptors()[8].channel_index, 1);
    }

    #[test]
    fn channel_permutation_permutes_column_blocks() {
        let set = epochs_with(3, 2);
        let perm = [2usize, 0, 1];
        let permuted = EpochSet::new(
            set.data().select(ndarray::Axis(1), &perm),
            250.0,
            perm.iter().map(|&c| format!("C{c}")).collect(),
            set.labels().to_vec(),
            set.subjects().to_vec(),
        )
        .unwrap();
        let cfg = WelchConfig::default();
        let a = spectral_feature_block(&set, &cfg, &BandSet::default()).unwrap();
        let b = spectral_feature_block(&permuted, &cfg, &BandSet::default()).unwrap();
        for (new_c, &old_c) in perm.iter().enumerate() {
            for k in 0..6 {
                assert_eq!(b.column(new_c * 6 + k), a.column(old_c * 6 + k));
            }
        }
    }
}
