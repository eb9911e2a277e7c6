//! First-order optimizers over a flat parameter vector.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamHyper {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl AdamHyper {
    pub fn new(lr: f64) -> Self {
        Self {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RmsPropHyper {
    pub lr: f64,
    pub rho: f64,
    pub eps: f64,
}

impl RmsPropHyper {
    pub fn new(lr: f64) -> Self {
        Self { lr, rho: 0.9, eps: 1e-8 }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct AdamState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub t: u64,
}

impl AdamState {
    pub fn new(n: usize) -> Self {
        Self {
            m: vec![0.0; n],
            v: vec![0.0; n],
            t: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RmsPropState {
    pub sq: Vec<f64>,
}

impl RmsPropState {
    pub fn new(n: usize) -> Self {
        Self { sq: vec![0.0; n] }
    }
}

fn check(params: &[f64], grads: &[f64], state: usize) -> Result<()> {
    for (context, found) in [("optimizer gradients", grads.len()), ("optimizer state", state)] {
        if found != params.len() {
            return Err(Error::DimensionMismatch {
                context,
                expected: params.len(),
                found,
            });
        }
    }
    Ok(())
}

/// Bias-corrected Adam update.
pub fn adam_step(params: &mut [f64], grads: &[f64], state: &mut AdamState, h: &AdamHyper) -> Result<()> {
    check(params, grads, state.m.len())?;
    check(params, grads, state.v.len())?;
    state.t += 1;
    let c1 = 1.0 - h.beta1.powi(state.t as i32);
    let c2 = 1.0 - h.beta2.powi(state.t as i32);
    for i in 0..params.len() {
        let g = grads[i];
        state.m[i] = h.beta1 * state.m[i] + (1.0 - h.beta1) * g;
        state.v[i] = h.beta2 * state.v[i] + (1.0 - h.beta2) * g * g;
        let m_hat = state.m[i] / c1;
        let v_hat = state.v[i] / c2;
        params[i] -= h.lr * m_hat / (v_hat.sqrt() + h.eps);
    }
    Ok(())
}

pub fn rmsprop_step(params: &mut [f64], grads: &[f64], state: &mut RmsPropState, h: &RmsPropHyper) -> Result<()> {
    check(params, grads, state.sq.len())?;
    for i in 0..params.len() {
        let g = grads[i];
        state.sq[i] = h.rho * state.sq[i] + (1.0 - h.rho) * g * g;
        params[i] -= h.lr * g / (state.sq[i].sqrt() + h.eps);
    }
    Ok(())
}
