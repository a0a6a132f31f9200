use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RmsPropConfig {
    pub learning_rate: f64,
    pub decay: f64,
    pub epsilon: f64,
}

impl Default for RmsPropConfig {
    fn default() -> Self {
        RmsPropConfig { learning_rate: 1e-4, decay: 0.99, epsilon: 1e-8 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RmsProp {
    pub config: RmsPropConfig,
    /// Running mean of squared gradients, one per parameter.
    square_avg: Vec<f64>,
}

impl RmsProp {
    pub fn new(config: RmsPropConfig, num_params: usize) -> Self {
        RmsProp { config, square_avg: vec![0.0; num_params] }
    }

    pub fn square_avg(&self) -> &[f64] {
        &self.square_avg
    }

    /// `s <- rho s + (1 - rho) g^2; p <- p - lr g / (sqrt(s) + eps)`.
    pub fn step(&mut self, params: &mut [f64], grads: &[f64]) -> Result<()> {
        if params.len() != self.square_avg.len() || grads.len() != params.len() {
            return Err(Error::ShapeMismatch { expected: self.square_avg.len(), got: grads.len() });
        }
        let RmsPropConfig { learning_rate, decay, epsilon } = self.config;
        for ((p, &g), s) in params.iter_mut().zip(grads).zip(&mut self.square_avg) {
            *s = decay * *s + (1.0 - decay) * g * g;
            *p -= learning_rate * g / (s.sqrt() + epsilon);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_leaves_params() {
        let mut opt = RmsProp::new(RmsPropConfig::default(), 3);
        let mut p = vec![1.0, -2.0, 3.0];
        opt.step(&mut p, &[0.0; 3]).unwrap();
        assert_eq!(p, vec![1.0, -2.0, 3.0]);
    }

    #[test]
    fn constant_gradient_step_tends_to_lr() {
        let cfg = RmsPropConfig::default();
        let mut opt = RmsProp::new(cfg, 1);
        let mut p = vec![0.0];
        let g = 0.37;
        let mut last = 0.0;
        for k in 0..3000 {
            let before = p[0];
            opt.step(&mut p, &[g]).unwrap();
            let delta = before - p[0];
            // s_k = (1 - rho^k) g^2, so the step is lr / sqrt(1 - rho^k)
            let s = (1.0 - cfg.decay.powi(k + 1)) * g * g;
            let expected = cfg.learning_rate * g / (s.sqrt() + cfg.epsilon);
            assert!((delta - expected).abs() < 1e-15);
            last = delta;
        }
        assert!((last - cfg.learning_rate).abs() < 1e-9);
        assert!(opt.square_avg()[0] >= 0.0);
    }

    #[test]
    fn deterministic() {
        let run = || {
            let mut opt = RmsProp::new(RmsPropConfig::default(), 2);
            let mut p = vec![0.5, 0.5];
            for k in 0..10 {
                opt.step(&mut p, &[k as f64 * 0.1, -1.0]).unwrap();
            }
            p
        };
        assert_eq!(run(), run());
        let mut opt = RmsProp::new(RmsPropConfig::default(), 2);
        assert!(opt.step(&mut [0.0; 3], &[0.0; 3]).is_err());
    }
}
