//! Bias-corrected Adam.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Adam {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub step: u64,
    pub first: Vec<f64>,
    pub second: Vec<f64>,
}

impl Adam {
    pub fn new(len: usize, lr: f64) -> Self {
        Self {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            step: 0,
            first: vec![0.0; len],
            second: vec![0.0; len],
        }
    }

    pub fn update(&mut self, params: &mut [f64], grads: &[f64]) {
        assert_eq!(params.len(), self.first.len(), "parameter shape");
        assert_eq!(grads.len(), self.first.len(), "gradient shape");
        self.step += 1;
        let c1 = 1.0 - self.beta1.powi(self.step as i32);
        let c2 = 1.0 - self.beta2.powi(self.step as i32);
        for i in 0..params.len() {
            let g = grads[i];
            self.first[i] = self.beta1 * self.first[i] + (1.0 - self.beta1) * g;
            self.second[i] = self.beta2 * self.second[i] + (1.0 - self.beta2) * g * g;
            let m = self.first[i] / c1;
            let v = self.second[i] / c2;
            params[i] -= self.lr * m / (v.sqrt() + self.eps);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn zero_gradient_leaves_parameters() {
        let mut opt = Adam::new(3, 5e-4);
        let mut p = vec![1.0, -2.0, 0.5];
        opt.update(&mut p, &[0.0; 3]);
        assert_eq!(p, vec![1.0, -2.0, 0.5]);
    }

    #[test]
    fn first_step_moves_by_learning_rate() {
        let mut opt = Adam::new(2, 5e-4);
        let mut p = vec![0.0, 0.0];
        opt.update(&mut p, &[3.0, -0.2]);
        assert_relative_eq!(p[0], -5e-4, max_relative = 1e-6);
        assert_relative_eq!(p[1], 5e-4, max_relative = 1e-6);
    }

    #[test]
    fn minimises_a_quadratic() {
        // f(x, y) = (x - 3)² + 10 (y + 1)²
        let mut opt = Adam::new(2, 1e-2);
        let mut p = vec![0.0, 0.0];
        for _ in 0..10_000 {
            let g = [2.0 * (p[0] - 3.0), 20.0 * (p[1] + 1.0)];
            opt.update(&mut p, &g);
        }
        assert!((p[0] - 3.0).abs() < 1e-6, "{p:?}");
        assert!((p[1] + 1.0).abs() < 1e-6, "{p:?}");
    }
}
