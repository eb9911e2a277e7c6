//! Linear SVM on two Gaussian blobs, and the cross-validated criterion on feature subsets.

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use bci_featsel::data::{FeatureDescriptor, FeatureFamily, FeatureMatrix};
use bci_featsel::selection::{criterion_svm_cv, CriterionConfig};
use bci_featsel::svm::{svm_predict, svm_train, SvmConfig};

fn main() -> bci_featsel::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let n = 120;
    let labels: Vec<u8> = (0..n).map(|i| (i % 2) as u8).collect();
    // column 0 separates the classes, column 1 is noise
    let x = Array2::from_shape_fn((n, 2), |(i, j)| {
        let shift = if j == 0 { 2.0 * labels[i] as f64 - 1.0 } else { 0.0 };
        shift + rng.sample::<f64, _>(StandardNormal)
    });
    let y: Vec<f64> = labels.iter().map(|&l| if l == 1 { 1.0 } else { -1.0 }).collect();

    let model = svm_train(x.view(), &y, SvmConfig::default())?;
    let pred = svm_predict(&model, x.view())?;
    let acc = pred.iter().zip(&y).filter(|(p, t)| **p as f64 == **t).count() as f64 / n as f64;
    println!("w = {:.3?}, b = {:.3}, training accuracy {:.1}%", model.weights, model.bias, 100.0 * acc);
    println!("objective {:.4} -> {:.4}", model.objective_trace[0], model.objective_trace.last().unwrap());

    let descriptors = vec![
        FeatureDescriptor::new(0, FeatureFamily::Spectral, "alpha"),
        FeatureDescriptor::new(1, FeatureFamily::Spectral, "alpha"),
    ];
    let features = FeatureMatrix::new(x, descriptors, labels, vec![1; n])?;
    let cfg = CriterionConfig::default();
    for subset in [vec![0], vec![1], vec![0, 1]] {
        println!("J({subset:?}) = {:.3}", criterion_svm_cv(&features, &subset, &cfg, 0)?);
    }
    Ok(())
}
