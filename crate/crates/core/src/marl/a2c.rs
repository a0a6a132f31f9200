//! Advantage actor-critic losses and their parameter gradients.

use crate::error::{Error, Result};
use crate::marl::mlp::Mlp;
use crate::marl::policy::{head_probabilities, log_prob, policy_logit_gradient};

/// `kappa = r + gamma V(s') - V(s)`, with no bootstrap after a terminal step.
pub fn advantage(reward: f64, gamma: f64, value: f64, next_value: f64, terminal: bool) -> f64 {
    let bootstrap = if terminal { 0.0 } else { gamma * next_value };
    reward + bootstrap - value
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticStep {
    pub value: f64,
    pub advantage: f64,
    /// `kappa^2`.
    pub loss: f64,
}

/// Evaluates the critic at `input` and accumulates `-kappa * dV/dparams`
/// into `grads`, so a descent step moves V toward the bootstrapped target.
pub fn critic_loss_and_grad(
    critic: &Mlp,
    input: &[f64],
    reward: f64,
    gamma: f64,
    next_value: f64,
    terminal: bool,
    grads: &mut [f64],
) -> Result<CriticStep> {
    if critic.output_dim() != 1 {
        return Err(Error::ShapeMismatch { expected: 1, got: critic.output_dim() });
    }
    let acts = critic.forward(input)?;
    let value = acts.output()[0];
    let kappa = advantage(reward, gamma, value, next_value, terminal);
    if kappa != 0.0 {
        critic.backward(&acts, &[-kappa], grads)?;
    }
    Ok(CriticStep { value, advantage: kappa, loss: kappa * kappa })
}

/// Accumulates the gradient of `-kappa log pi(action | obs)` (plus an
/// optional per-head entropy bonus) into `grads`; returns the loss.
pub fn actor_loss_and_grad(
    actor: &Mlp,
    obs: &[f64],
    heads: &[usize],
    action: &[usize],
    kappa: f64,
    entropy: &[f64],
    grads: &mut [f64],
) -> Result<f64> {
    let acts = actor.forward(obs)?;
    let probs = head_probabilities(acts.output(), heads)?;
    let loss = -kappa * log_prob(&probs, heads, action)?;
    if kappa != 0.0 || entropy.iter().any(|&c| c != 0.0) {
        let g = policy_logit_gradient(&probs, heads, action, kappa, entropy)?;
        actor.backward(&acts, &g, grads)?;
    }
    Ok(loss)
}
