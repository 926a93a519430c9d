use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Bias-corrected Adam, minimizing.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdamState {
    pub step: u64,
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl AdamState {
    pub fn new(dim: usize, learning_rate: f64) -> Self {
        AdamState {
            step: 0,
            m: vec![0.0; dim],
            v: vec![0.0; dim],
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }

    pub fn dim(&self) -> usize {
        self.m.len()
    }

    /// Moves `params` against `grad` in place.
    pub fn update(&mut self, params: &mut [f64], grad: &[f64]) -> Result<()> {
        for len in [params.len(), grad.len()] {
            if len != self.dim() {
                return Err(Error::DimensionMismatch {
                    expected: self.dim(),
                    got: len,
                });
            }
        }
        self.step += 1;
        let t = self.step as i32;
        let c1 = 1.0 - self.beta1.powi(t);
        let c2 = 1.0 - self.beta2.powi(t);
        for i in 0..params.len() {
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * grad[i];
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * grad[i] * grad[i];
            let m_hat = self.m[i] / c1;
            let v_hat = self.v[i] / c2;
            params[i] -= self.learning_rate * m_hat / (v_hat.sqrt() + self.eps);
        }
        Ok(())
    }
}

/// Functional form of [`AdamState::update`].
pub fn adam_step(state: &AdamState, params: &[f64], grad: &[f64]) -> Result<(AdamState, Vec<f64>)> {
    let mut s = state.clone();
    let mut p = params.to_vec();
    s.update(&mut p, grad)?;
    Ok((s, p))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quadratic(scale: f64) -> f64 {
        let mut s = AdamState::new(1, 0.1);
        let mut x = [0.0];
        for _ in 0..500 {
            let g = [scale * 2.0 * (x[0] - 3.0)];
            s.update(&mut x, &g).unwrap();
        }
        x[0]
    }

    #[test]
    fn first_step_is_lr_sized() {
        let (_, p) = adam_step(&AdamState::new(1, 0.01), &[1.0], &[1.0]).unwrap();
        assert!((p[0] - 0.99).abs() < 1e-6);
    }

    #[test]
    fn zero_gradient_is_fixed_point() {
        let mut s = AdamState::new(2, 0.1);
        let mut x = [1.0, -2.0];
        for _ in 0..100 {
            s.update(&mut x, &[0.0, 0.0]).unwrap();
        }
        assert_eq!(x, [1.0, -2.0]);
    }

    #[test]
    fn converges_on_quadratic() {
        assert!((quadratic(1.0) - 3.0).abs() < 1e-2);
        assert!((quadratic(10.0) - 3.0).abs() < 1e-2);
    }

    #[test]
    fn dimension_checked() {
        let mut s = AdamState::new(2, 0.1);
        assert!(s.update(&mut [0.0], &[1.0]).is_err());
    }
}
