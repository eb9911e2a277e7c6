//! Seeded synthetic motor-imagery epochs with a planted band-limited class difference.
//!
//! Every channel carries AR(1) noise (a 1/f-like spectrum). Class-1 epochs add a sinusoid
//! at a random in-band frequency and phase on the planted channels. Each subject has its
//! own per-channel gain so that subjects differ in scale.

use ndarray::Array3;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::data::{EpochSet, LEFT_HAND, RIGHT_HAND};
use crate::error::{Error, Result};
use crate::rng::stream;

/// The 22 electrodes of the 10-20 motor-imagery montage, in recording order.
pub const MONTAGE_22: [&str; 22] = [
    "Fz", "FC3", "FC1", "FCz", "FC2", "FC4", "C5", "C3", "C1", "Cz", "C2", "C4", "C6", "CP3", "CP1", "CPz", "CP2",
    "CP4", "P1", "Pz", "P2", "POz",
];

const AR_COEFF: f64 = 0.9;
const BURN_IN: usize = 200;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub n_subjects: usize,
    pub epochs_per_class: usize,
    pub n_channels: usize,
    pub fs: f64,
    pub n_samples: usize,
    pub planted_channels: Vec<usize>,
    pub band: (f64, f64),
    /// Ratio of class-1 to class-0 RMS on a planted channel; 1 means no signal.
    pub effect_size: f64,
    /// RMS of the background noise.
    pub noise_level: f64,
    /// Per-subject channel gains are drawn log-uniformly from `[1 / jitter, jitter]`.
    pub gain_jitter: f64,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            n_subjects: 4,
            epochs_per_class: 60,
            n_channels: 8,
            fs: 250.0,
            n_samples: 175,
            planted_channels: vec![2, 5],
            band: (8.0, 13.0),
            effect_size: 2.0,
            noise_level: 1.0,
            gain_jitter: 1.25,
            seed: 7,
        }
    }
}

impl SyntheticSpec {
    /// `allow_null` admits `effect_size == 1` (the no-signal control).
    pub fn validate(&self, allow_null: bool) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if self.n_subjects == 0 || self.epochs_per_class == 0 || self.n_channels == 0 || self.n_samples == 0 {
            return bad("subjects, epochs, channels and samples must be positive".into());
        }
        if let Some(&c) = self.planted_channels.iter().find(|&&c| c >= self.n_channels) {
            return bad(format!("planted channel {c} out of range for {} channels", self.n_channels));
        }
        if !(self.fs > 0.0 && 0.0 < self.band.0 && self.band.0 < self.band.1 && self.band.1 < self.fs / 2.0) {
            return bad(format!("band {:?} at fs {}", self.band, self.fs));
        }
        if !(self.effect_size > 1.0 || (allow_null && self.effect_size == 1.0)) {
            return bad(format!("effect size {} must exceed 1", self.effect_size));
        }
        if !(self.noise_level > 0.0 && self.gain_jitter >= 1.0) {
            return bad(format!("noise {} gain jitter {}", self.noise_level, self.gain_jitter));
        }
        Ok(())
    }

    /// Sinusoid amplitude that makes class-1 RMS `effect_size` times the noise RMS.
    pub fn amplitude(&self) -> f64 {
        self.noise_level * (2.0 * (self.effect_size.powi(2) - 1.0)).sqrt()
    }

    pub fn channel_names(&self) -> Vec<String> {
        (0..self.n_channels)
            .map(|c| MONTAGE_22.get(c).map_or_else(|| format!("ch{c}"), |s| s.to_string()))
            .collect()
    }
}

/// Unit-RMS AR(1) noise.
fn ar_noise(rng: &mut impl Rng, n: usize) -> impl Iterator<Item = f64> + '_ {
    let scale = (1.0 - AR_COEFF * AR_COEFF).sqrt();
    let mut x = 0.0;
    (0..BURN_IN + n)
        .map(move |_| {
            let w: f64 = rng.sample(StandardNormal);
            x = AR_COEFF * x + w;
            x * scale
        })
        .skip(BURN_IN)
}

/// Epochs ordered by subject, then alternating class. Class 0 is left hand, class 1 right hand.
pub fn generate(spec: &SyntheticSpec, allow_null: bool) -> Result<EpochSet> {
    spec.validate(allow_null)?;
    let n_epochs = spec.n_subjects * 2 * spec.epochs_per_class;
    let mut data = Array3::<f32>::zeros((n_epochs, spec.n_channels, spec.n_samples));
    let mut labels = Vec::with_capacity(n_epochs);
    let mut subjects = Vec::with_capacity(n_epochs);
    let amp = spec.amplitude();
    let log_j = spec.gain_jitter.ln();
    let mut e = 0;
    for s in 0..spec.n_subjects {
        let mut rng = stream(spec.seed, s as u64);
        let gains: Vec<f64> = (0..spec.n_channels)
            .map(|_| if log_j > 0.0 { rng.random_range(-log_j..log_j).exp() } else { 1.0 })
            .collect();
        for k in 0..2 * spec.epochs_per_class {
            let class = k % 2;
            let freq = rng.random_range(spec.band.0..spec.band.1);
            let phase = rng.random_range(0.0..std::f64::consts::TAU);
            for c in 0..spec.n_channels {
                let planted = class == 1 && amp > 0.0 && spec.planted_channels.contains(&c);
                let noise: Vec<f64> = ar_noise(&mut rng, spec.n_samples).collect();
                for (t, n) in noise.into_iter().enumerate() {
                    let mut v = spec.noise_level * n;
                    if planted {
                        v += amp * (std::f64::consts::TAU * freq * t as f64 / spec.fs + phase).sin();
                    }
                    data[[e, c, t]] = (gains[c] * v) as f32;
                }
            }
            labels.push(if class == 0 { LEFT_HAND } else { RIGHT_HAND });
            subjects.push(s as u32 + 1);
            e += 1;
        }
    }
    EpochSet::new(data, spec.fs, spec.channel_names(), labels, subjects)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_and_determinism() {
        let spec = SyntheticSpec {
            n_subjects: 2,
            epochs_per_class: 40,
            ..SyntheticSpec::default()
        };
        let a = generate(&spec, false).unwrap();
        assert_eq!(a.n_epochs(), 160);
        assert_eq!(a.n_channels(), 8);
        assert_eq!(a.channel_names()[7], "C3");
        assert_eq!(a, generate(&spec, false).unwrap());
        assert_eq!(a.subject_ids(), vec![1, 2]);
    }

    #[test]
    fn null_effect_needs_permission() {
        let spec = SyntheticSpec {
            effect_size: 1.0,
            ..SyntheticSpec::default()
        };
        assert!(generate(&spec, false).is_err());
        assert!(generate(&spec, true).is_ok());
        assert_eq!(spec.amplitude(), 0.0);
        assert!(SyntheticSpec { planted_channels: vec![8], ..SyntheticSpec::default() }.validate(false).is_err());
    }

    #[test]
    fn planted_channels_carry_the_rms_ratio() {
        let spec = SyntheticSpec {
            n_subjects: 1,
            epochs_per_class: 300,
            gain_jitter: 1.0,
            ..SyntheticSpec::default()
        };
        let set = generate(&spec, false).unwrap();
        let power = |class: u32, c: usize| {
            let mut acc = 0.0;
            let mut n = 0.0;
            for e in (0..set.n_epochs()).filter(|&e| set.labels()[e] == class) {
                acc += set.trace(e, c).iter().map(|&v| (v as f64).powi(2)).sum::<f64>();
                n += set.n_samples() as f64;
            }
            acc / n
        };
        let ratio = (power(RIGHT_HAND, 2) / power(LEFT_HAND, 2)).sqrt();
        assert!((ratio - 2.0).abs() < 0.1, "{ratio}");
        let flat = (power(RIGHT_HAND, 0) / power(LEFT_HAND, 0)).sqrt();
        assert!((flat - 1.0).abs() < 0.1, "{flat}");
    }
}
