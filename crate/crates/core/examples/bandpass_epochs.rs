//! Band-pass a continuous two-channel recording and cut epochs around event markers.

use ndarray::Array2;

use bci_featsel::data::{LEFT_HAND, RIGHT_HAND};
use bci_featsel::preprocess::{default_taps, design_bandpass, filter_channels, segment_epochs, Event};

fn main() -> bci_featsel::Result<()> {
    let fs = 250.0;
    let n = 10 * fs as usize;
    // 10 Hz rhythm plus slow drift and 60 Hz line noise
    let continuous = Array2::from_shape_fn((2, n), |(c, t)| {
        let t = t as f64 / fs;
        let tau = std::f64::consts::TAU;
        ((tau * 10.0 * t).sin() + 3.0 * (tau * 0.2 * t).sin() + (tau * 60.0 * t).sin() * (c + 1) as f64) as f32
    });

    let filter = design_bandpass(0.5, 40.0, fs, default_taps(fs))?;
    println!("{} taps, group delay {} samples", filter.taps.len(), filter.delay());
    for f in [0.1, 10.0, 60.0] {
        println!("  |H({f:>4} Hz)| = {:.4}", filter.magnitude_at(f));
    }
    let filtered = filter_channels(&filter, &continuous)?;

    let events: Vec<Event> = (1..9)
        .map(|k| Event {
            sample: k * 250,
            class_id: if k % 2 == 0 { LEFT_HAND } else { RIGHT_HAND },
            subject_id: 1,
        })
        .collect();
    let seg = segment_epochs(&filtered, vec!["C3".into(), "C4".into()], &events, fs, 0.2, 0.5)?;
    println!(
        "{} epochs of {} samples ({} skipped), labels {:?}",
        seg.epochs.n_epochs(),
        seg.epochs.n_samples(),
        seg.skipped,
        seg.epochs.labels()
    );
    Ok(())
}
