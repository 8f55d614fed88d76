//! Adam with bias correction over lists of flat parameter tensors.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdamHyper {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamHyper {
    fn default() -> Self {
        Self { lr: 1e-4, beta1: 0.9, beta2: 0.999, eps: 1e-8 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdamState {
    pub hyper: AdamHyper,
    pub step: u64,
    pub first_moment: Vec<Vec<f64>>,
    pub second_moment: Vec<Vec<f64>>,
}

impl AdamState {
    /// Fresh state with zero moments shaped like `params`.
    pub fn new(hyper: AdamHyper, params: &[Vec<f64>]) -> Self {
        let zeros: Vec<Vec<f64>> = params.iter().map(|p| vec![0.0; p.len()]).collect();
        Self { hyper, step: 0, first_moment: zeros.clone(), second_moment: zeros }
    }

    pub fn reset(&mut self) {
        self.step = 0;
        for m in self.first_moment.iter_mut().chain(self.second_moment.iter_mut()) {
            m.iter_mut().for_each(|x| *x = 0.0);
        }
    }
}

/// One Adam update of `params` in place.
///
/// Every gradient is checked before anything is modified, so a rejected step
/// leaves both the state and the parameters untouched.
pub fn adam_step(state: &mut AdamState, params: &mut [Vec<f64>], grads: &[Vec<f64>]) -> Result<()> {
    if params.len() != grads.len() || params.len() != state.first_moment.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} parameter tensors, {} gradients, {} moment tensors",
            params.len(),
            grads.len(),
            state.first_moment.len()
        )));
    }
    for (tensor, (p, g)) in params.iter().zip(grads).enumerate() {
        if p.len() != g.len() || p.len() != state.first_moment[tensor].len() {
            return Err(Error::ShapeMismatch(format!(
                "tensor {tensor}: {} parameters, {} gradients",
                p.len(),
                g.len()
            )));
        }
        if let Some(index) = g.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFiniteGradient { tensor, index, step: state.step + 1 });
        }
    }

    state.step += 1;
    let AdamHyper { lr, beta1, beta2, eps } = state.hyper;
    let t = state.step as i32;
    let bias1 = 1.0 - beta1.powi(t);
    let bias2 = 1.0 - beta2.powi(t);
    for (tensor, (p, g)) in params.iter_mut().zip(grads).enumerate() {
        let m = &mut state.first_moment[tensor];
        let v = &mut state.second_moment[tensor];
        for k in 0..p.len() {
            m[k] = beta1 * m[k] + (1.0 - beta1) * g[k];
            v[k] = beta2 * v[k] + (1.0 - beta2) * g[k] * g[k];
            let m_hat = m[k] / bias1;
            let v_hat = v[k] / bias2;
            p[k] -= lr * m_hat / (v_hat.sqrt() + eps);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_leaves_params() {
        let mut params = vec![vec![1.0, -2.0], vec![0.5]];
        let before = params.clone();
        let mut state = AdamState::new(AdamHyper::default(), &params);
        adam_step(&mut state, &mut params, &[vec![0.0, 0.0], vec![0.0]]).unwrap();
        assert_eq!(params, before);
        assert_eq!(state.step, 1);
    }

    #[test]
    fn scalar_first_step() {
        let mut params = vec![vec![0.0]];
        let mut state = AdamState::new(AdamHyper::default(), &params);
        adam_step(&mut state, &mut params, &[vec![1.0]]).unwrap();
        // m_hat = 1, v_hat = 1 after bias correction.
        let expected = -1e-4 / (1.0 + 1e-8);
        assert!((params[0][0] - expected).abs() < 1e-18);
        assert!((params[0][0] + 9.99999990e-5).abs() < 1e-13);
    }

    #[test]
    fn non_finite_gradient_aborts_without_mutation() {
        let mut params = vec![vec![0.0, 1.0]];
        let mut state = AdamState::new(AdamHyper::default(), &params);
        let err = adam_step(&mut state, &mut params, &[vec![1.0, f64::NAN]]).unwrap_err();
        assert!(matches!(err, Error::NonFiniteGradient { tensor: 0, index: 1, step: 1 }));
        assert_eq!(state.step, 0);
        assert_eq!(params, vec![vec![0.0, 1.0]]);
    }

    #[test]
    fn shape_mismatch() {
        let mut params = vec![vec![0.0, 1.0]];
        let mut state = AdamState::new(AdamHyper::default(), &params);
        assert!(matches!(adam_step(&mut state, &mut params, &[vec![1.0]]), Err(Error::ShapeMismatch(_))));
    }

    #[test]
    fn reset_clears_moments() {
        let mut params = vec![vec![0.0]];
        let mut state = AdamState::new(AdamHyper::default(), &params);
        adam_step(&mut state, &mut params, &[vec![3.0]]).unwrap();
        state.reset();
        assert_eq!(state, AdamState::new(AdamHyper::default(), &params));
    }
}
