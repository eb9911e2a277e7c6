//! Welch spectrum of a noisy alpha rhythm and its six EEG band powers.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use bci_featsel::spectral::{band_powers, welch_psd, BandSet, WelchConfig};

fn main() -> bci_featsel::Result<()> {
    let fs = 250.0;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let noise = Normal::new(0.0, 0.5).unwrap();
    let x: Vec<f64> = (0..1000)
        .map(|t| (std::f64::consts::TAU * 10.0 * t as f64 / fs).sin() + noise.sample(&mut rng))
        .collect();

    let cfg = WelchConfig::hann(250, 125)?;
    let psd = welch_psd(&x, &cfg, fs)?;
    let peak = (0..psd.power.len()).max_by(|&a, &b| psd.power[a].total_cmp(&psd.power[b])).unwrap();
    println!("{} segments, resolution {} Hz, peak at {} Hz", cfg.n_segments(x.len()), psd.freqs[1], psd.freqs[peak]);

    let bands = BandSet::default();
    let bp = band_powers(&psd.freqs, &psd.power, &bands)?;
    let total: f64 = bp.powers.iter().sum();
    for (band, p) in bands.bands.iter().zip(&bp.powers) {
        println!("{:<10} [{:>4}, {:>4}) Hz  {:6.1}%", band.name, band.f_lo, band.f_hi, 100.0 * p / total);
    }
    Ok(())
}
