use serde::{Deserialize, Serialize};

use super::{NnError, ParamSet};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdamState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub t: u64,
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl AdamState {
    pub fn new(dim: usize, lr: f64) -> Self {
        Self {
            m: vec![0.0; dim],
            v: vec![0.0; dim],
            t: 0,
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }

    pub fn for_params(params: &ParamSet, lr: f64) -> Self {
        Self::new(params.len(), lr)
    }
}

/// One bias-corrected Adam step. A non-finite gradient leaves both the
/// parameters and the optimizer state untouched.
pub fn adam_step(params: &mut ParamSet, grads: &[f64], state: &mut AdamState) -> Result<(), NnError> {
    let n = params.len();
    if grads.len() != n || state.m.len() != n || state.v.len() != n {
        return Err(NnError::DimensionMismatch {
            what: "adam gradient",
            expected: n,
            got: grads.len(),
        });
    }
    let bad: Vec<usize> = grads
        .iter()
        .enumerate()
        .filter(|(_, g)| !g.is_finite())
        .map(|(i, _)| i)
        .collect();
    if let Some(&first) = bad.first() {
        return Err(NnError::NonFinite {
            what: format!("{} gradient", params.role().name()),
            index: first,
            count: bad.len(),
            value: grads[first],
        });
    }
    state.t += 1;
    let t = state.t as i32;
    let bc1 = 1.0 - state.beta1.powi(t);
    let bc2 = 1.0 - state.beta2.powi(t);
    let (b1, b2) = (state.beta1, state.beta2);
    let step = state.lr / bc1;
    let bc2_sqrt = bc2.sqrt();
    for (((p, &g), m), v) in params
        .as_mut_slice()
        .iter_mut()
        .zip(grads)
        .zip(state.m.iter_mut())
        .zip(state.v.iter_mut())
    {
        *m = b1 * *m + (1.0 - b1) * g;
        *v = b2 * *v + (1.0 - b2) * g * g;
        *p -= step * *m / (v.sqrt() / bc2_sqrt + state.eps);
    }
    Ok(())
}

/// Rescales `grads` in place so its L2 norm is at most `max_norm`; returns the original norm.
pub fn clip_grad_norm(grads: &mut [f64], max_norm: f64) -> f64 {
    let norm = grads.iter().map(|g| g * g).sum::<f64>().sqrt();
    if norm > max_norm && norm.is_finite() {
        let s = max_norm / norm;
        grads.iter_mut().for_each(|g| *g *= s);
    }
    norm
}
