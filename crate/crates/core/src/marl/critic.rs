//! One value network over every agent's observation and action encoding.

use crate::error::{Error, Result};
use crate::marl::mlp::Mlp;

#[derive(Debug, Clone, PartialEq)]
pub struct CentralCritic {
    pub net: Mlp,
    agents: usize,
    obs_dim: usize,
    action_dim: usize,
}

impl CentralCritic {
    pub fn input_dim(agents: usize, obs_dim: usize, action_dim: usize) -> usize {
        agents * (obs_dim + action_dim)
    }

    pub fn new(net: Mlp, agents: usize, obs_dim: usize, action_dim: usize) -> Result<Self> {
        let expected = Self::input_dim(agents, obs_dim, action_dim);
        if net.input_dim() != expected {
            return Err(Error::ShapeMismatch { expected, got: net.input_dim() });
        }
        if net.output_dim() != 1 {
            return Err(Error::ShapeMismatch { expected: 1, got: net.output_dim() });
        }
        Ok(CentralCritic { net, agents, obs_dim, action_dim })
    }

    pub fn agents(&self) -> usize {
        self.agents
    }

    /// Per-agent blocks `[obs_j, action_j]` in agent order.
    pub fn input<O: AsRef<[f64]>, A: AsRef<[f64]>>(&self, obs: &[O], actions: &[A]) -> Result<Vec<f64>> {
        if obs.len() != self.agents || actions.len() != self.agents {
            return Err(Error::ShapeMismatch { expected: self.agents, got: obs.len().min(actions.len()) });
        }
        let mut x = Vec::with_capacity(self.net.input_dim());
        for (o, a) in obs.iter().zip(actions) {
            let (o, a) = (o.as_ref(), a.as_ref());
            if o.len() != self.obs_dim {
                return Err(Error::ShapeMismatch { expected: self.obs_dim, got: o.len() });
            }
            if a.len() != self.action_dim {
                return Err(Error::ShapeMismatch { expected: self.action_dim, got: a.len() });
            }
            x.extend_from_slice(o);
            x.extend_from_slice(a);
        }
        Ok(x)
    }

    pub fn value<O: AsRef<[f64]>, A: AsRef<[f64]>>(&self, obs: &[O], actions: &[A]) -> Result<f64> {
        Ok(self.net.predict(&self.input(obs, actions)?)?[0])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dims_and_block_order() {
        assert_eq!(CentralCritic::input_dim(2, 30, 28), 116);
        let c = CentralCritic::new(Mlp::zeros(&[6, 1]).unwrap(), 2, 2, 1).unwrap();
        let x = c.input(&[vec![1.0, 2.0], vec![3.0, 4.0]], &[vec![9.0], vec![8.0]]).unwrap();
        assert_eq!(x, vec![1.0, 2.0, 9.0, 3.0, 4.0, 8.0]);
        let swapped = c.input(&[vec![3.0, 4.0], vec![1.0, 2.0]], &[vec![8.0], vec![9.0]]).unwrap();
        assert_ne!(x, swapped);
        assert!(c.input(&[vec![1.0]], &[vec![1.0]]).is_err());
        assert!(CentralCritic::new(Mlp::zeros(&[5, 1]).unwrap(), 2, 2, 1).is_err());
    }

    #[test]
    fn single_agent() {
        let c = CentralCritic::new(Mlp::from_parts(&[3, 1], vec![1.0, 1.0, 1.0, 0.5]).unwrap(), 1, 2, 1).unwrap();
        assert_eq!(c.value(&[[1.0, 2.0]], &[[3.0]]).unwrap(), 6.5);
    }
}
