//! Morlet transform of a signal that switches from 6 Hz to 25 Hz halfway through.

use bci_featsel::wavelet::{cwt, MorletParams, ScaleGrid};

fn main() -> bci_featsel::Result<()> {
    let fs = 250.0;
    let x: Vec<f64> = (0..500)
        .map(|t| {
            let f = if t < 250 { 6.0 } else { 25.0 };
            (std::f64::consts::TAU * f * t as f64 / fs).sin()
        })
        .collect();
    let p = MorletParams::default();
    let grid = ScaleGrid::log2(2.0, 64.0, 16)?;
    let w = cwt(&x, &grid, p, fs)?;
    for b in (50..500).step_by(50) {
        let best = (0..grid.len())
            .max_by(|&i, &j| w[[i, b]].norm().total_cmp(&w[[j, b]].norm()))
            .unwrap();
        println!("t = {:.2} s  dominant {:5.1} Hz", b as f64 / fs, p.frequency_at(grid.scales[best], fs));
    }
    Ok(())
}
