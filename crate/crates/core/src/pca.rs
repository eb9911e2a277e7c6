//! Principal component analysis by eigendecomposition of the population covariance.

use nalgebra::{DMatrix, SymmetricEigen};
use ndarray::{Array2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaModel {
    pub mean: Vec<f64>,
    /// `[n_components, dim]`, orthonormal rows.
    pub components: Array2<f64>,
    /// Eigenvalues matching `components`, descending.
    pub explained_variance: Vec<f64>,
}

impl PcaModel {
    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn n_components(&self) -> usize {
        self.components.nrows()
    }

    /// `(X - mean) * components^T`.
    pub fn project(&self, x: &Array2<f64>) -> Result<Array2<f64>> {
        if x.ncols() != self.dim() {
            return Err(Error::DimensionMismatch {
                context: "pca input columns",
                expected: self.dim(),
                found: x.ncols(),
            });
        }
        let mut centered = x.clone();
        for mut row in centered.axis_iter_mut(Axis(0)) {
            for (v, m) in row.iter_mut().zip(&self.mean) {
                *v -= m;
            }
        }
        Ok(centered.dot(&self.components.t()))
    }

    /// Map scores back to the input space (mean included).
    pub fn reconstruct(&self, scores: &Array2<f64>) -> Array2<f64> {
        let mut x = scores.dot(&self.components);
        for mut row in x.axis_iter_mut(Axis(0)) {
            for (v, m) in row.iter_mut().zip(&self.mean) {
                *v += m;
            }
        }
        x
    }
}

/// Top `n_components` eigenvectors of the covariance of `x` (rows are observations).
///
/// Each component is signed so that its largest-magnitude coordinate is positive.
pub fn pca_fit(x: &Array2<f64>, n_components: usize) -> Result<PcaModel> {
    let (n, dim) = x.dim();
    if n < 2 {
        return Err(Error::InvalidParameter(format!("pca needs at least 2 observations, got {n}")));
    }
    if n_components == 0 || n_components > n.min(dim) {
        return Err(Error::InvalidParameter(format!(
            "n_components {n_components} not in 1..={}",
            n.min(dim)
        )));
    }
    let mean: Vec<f64> = x.mean_axis(Axis(0)).expect("non-empty").to_vec();
    let mut centered = x.clone();
    for mut row in centered.axis_iter_mut(Axis(0)) {
        for (v, m) in row.iter_mut().zip(&mean) {
            *v -= m;
        }
    }
    let cov = centered.t().dot(&centered) / n as f64;
    let cov = DMatrix::from_fn(dim, dim, |i, j| 0.5 * (cov[[i, j]] + cov[[j, i]]));
    let eig = SymmetricEigen::new(cov);

    let mut order: Vec<usize> = (0..dim).collect();
    // stable: equal eigenvalues keep nalgebra's order
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));

    let mut components = Array2::<f64>::zeros((n_components, dim));
    let mut explained_variance = Vec::with_capacity(n_components);
    for (r, &k) in order.iter().take(n_components).enumerate() {
        let v = eig.eigenvectors.column(k);
        let pivot = (0..dim)
            .max_by(|&a, &b| v[a].abs().total_cmp(&v[b].abs()).then(b.cmp(&a)))
            .unwrap();
        let sign = if v[pivot] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..dim {
            components[[r, j]] = sign * v[j];
        }
        explained_variance.push(eig.eigenvalues[k].max(0.0));
    }
    Ok(PcaModel {
        mean,
        components,
        explained_variance,
    })
}

pub fn pca_project(model: &PcaModel, x: &Array2<f64>) -> Result<Array2<f64>> {
    model.project(x)
}
