//! Linear soft-margin SVM trained by deterministic full-batch subgradient descent.
//!
//! Minimizes `(lambda/2)|w|^2 + (1/n) * sum_i max(0, 1 - y_i (w.x_i + b))` with
//! `lambda = 1 / C`, Pegasos step sizes `1 / (lambda * t)`, and iterate averaging.
//! The returned model is whichever of the averaged iterate and the best iterate seen
//! has the lower objective.

use ndarray::{Array1, ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvmConfig {
    /// Trade-off between margin violations and weight norm; `lambda = 1 / c`.
    pub c: f64,
    /// Full-batch subgradient iterations.
    pub epochs: usize,
}

impl Default for SvmConfig {
    fn default() -> Self {
        Self { c: 1.0, epochs: 200 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub config: SvmConfig,
    /// Objective of the best checkpoint so far, one entry per iteration.
    pub objective_trace: Vec<f64>,
}

impl SvmModel {
    pub fn decision(&self, x: ArrayView1<'_, f64>) -> f64 {
        x.iter().zip(&self.weights).map(|(a, b)| a * b).sum::<f64>() + self.bias
    }
}

/// Regularized mean hinge loss.
pub fn svm_objective(x: ArrayView2<'_, f64>, y: &[f64], w: &[f64], b: f64, lambda: f64) -> f64 {
    let n = x.nrows() as f64;
    let hinge: f64 = x
        .outer_iter()
        .zip(y)
        .map(|(row, &yi)| {
            let f = row.iter().zip(w).map(|(a, c)| a * c).sum::<f64>() + b;
            (1.0 - yi * f).max(0.0)
        })
        .sum();
    0.5 * lambda * w.iter().map(|v| v * v).sum::<f64>() + hinge / n
}

/// Train on rows of `x` with labels `y` in {-1, +1}.
pub fn svm_train(x: ArrayView2<'_, f64>, y: &[f64], cfg: SvmConfig) -> Result<SvmModel> {
    let (n, d) = x.dim();
    if y.len() != n {
        return Err(Error::DimensionMismatch {
            context: "svm labels",
            expected: n,
            found: y.len(),
        });
    }
    if !(cfg.c > 0.0 && cfg.c.is_finite()) || cfg.epochs == 0 {
        return Err(Error::InvalidParameter(format!("svm C={} epochs={}", cfg.c, cfg.epochs)));
    }
    if y.iter().any(|&v| v != 1.0 && v != -1.0) {
        return Err(Error::InvalidParameter("svm labels must be +1 or -1".into()));
    }
    if !(y.contains(&1.0) && y.contains(&-1.0)) {
        return Err(Error::SingleClass);
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("svm training rows".into()));
    }
    let lambda = 1.0 / cfg.c;
    let inv_n = 1.0 / n as f64;

    let mut w = Array1::<f64>::zeros(d);
    let mut b = 0.0;
    let mut w_sum = Array1::<f64>::zeros(d);
    let mut b_sum = 0.0;
    let mut best = (f64::INFINITY, w.clone(), b);
    let mut trace = Vec::with_capacity(cfg.epochs);
    let mut grad = Array1::<f64>::zeros(d);

    for t in 1..=cfg.epochs {
        // margins and objective at the current iterate
        grad.fill(0.0);
        let mut g_b = 0.0;
        let mut hinge = 0.0;
        for (row, &yi) in x.outer_iter().zip(y) {
            let f = row.dot(&w) + b;
            let slack = 1.0 - yi * f;
            if slack > 0.0 {
                hinge += slack;
                grad.scaled_add(-yi, &row);
                g_b -= yi;
            }
        }
        let obj = 0.5 * lambda * w.dot(&w) + hinge * inv_n;
        if obj < best.0 {
            best = (obj, w.clone(), b);
        }
        trace.push(best.0);

        let eta = 1.0 / (lambda * t as f64);
        // w <- w - eta * (lambda * w + grad / n)
        w *= 1.0 - eta * lambda;
        w.scaled_add(-eta * inv_n, &grad);
        b -= eta * inv_n * g_b;
        w_sum += &w;
        b_sum += b;
    }

    let w_avg = &w_sum / cfg.epochs as f64;
    let b_avg = b_sum / cfg.epochs as f64;
    let avg_obj = svm_objective(x, y, w_avg.as_slice().unwrap(), b_avg, lambda);
    let (weights, bias) = if avg_obj < best.0 {
        if let Some(last) = trace.last_mut() {
            *last = avg_obj;
        }
        (w_avg.to_vec(), b_avg)
    } else {
        (best.1.to_vec(), best.2)
    };
    Ok(SvmModel {
        weights,
        bias,
        config: cfg,
        objective_trace: trace,
    })
}

/// `sign(w.x + b)` with `sign(0) = +1`.
pub fn svm_predict(m: &SvmModel, x: ArrayView2<'_, f64>) -> Result<Vec<i8>> {
    if x.ncols() != m.weights.len() {
        return Err(Error::DimensionMismatch {
            context: "svm input columns",
            expected: m.weights.len(),
            found: x.ncols(),
        });
    }
    Ok(x.outer_iter()
        .map(|row| if m.decision(row) >= 0.0 { 1 } else { -1 })
        .collect())
}
