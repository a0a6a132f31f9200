//! Synchronous A2C training with a central critic.
//!
//! Rollout workers step their own environments with a read-only snapshot of
//! the actors. Their transitions are concatenated in worker order, then the
//! critic is fitted, advantages are recomputed with the fitted critic and
//! sent to every actor.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::env::{ActionSpace, Env, EpisodeTotals, RewardWeights, StepOutcome};
use crate::error::{Error, Result};
use crate::marl::a2c::{actor_loss_and_grad, advantage, critic_loss_and_grad};
use crate::marl::critic::CentralCritic;
use crate::marl::mlp::Mlp;
use crate::marl::policy::{greedy, head_probabilities, sample};
use crate::marl::rmsprop::{RmsProp, RmsPropConfig};
use crate::scenario::Scenario;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    pub gamma: f64,
    pub actor_lr: f64,
    pub critic_lr: f64,
    pub rms_decay: f64,
    pub rms_epsilon: f64,
    pub hidden: Vec<usize>,
    /// Transitions collected between updates.
    pub batch: usize,
    /// Transitions per optimizer step within an update.
    pub minibatch: usize,
    pub episodes: usize,
    pub seed: u64,
    /// Logical rollout workers; fixed so results do not depend on threads.
    pub workers: usize,
    pub entropy_coef: f64,
    /// Entropy weight on the two association heads; `entropy_coef` when unset.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub association_entropy_coef: Option<f64>,
    /// Learn from `sign(r) ln(1 + |r|)` instead of the raw reward.
    pub compress_reward: bool,
    /// Multiplies the learning reward after compression.
    pub reward_scale: f64,
    /// Standardize advantages over each update batch.
    pub normalize_advantage: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            gamma: 0.99,
            actor_lr: 1e-4,
            critic_lr: 1e-4,
            rms_decay: 0.99,
            rms_epsilon: 1e-8,
            hidden: vec![128, 128],
            batch: 1072,
            minibatch: 4,
            episodes: 50_000,
            seed: 1,
            workers: 4,
            entropy_coef: 0.0,
            association_entropy_coef: None,
            compress_reward: true,
            reward_scale: 0.01,
            normalize_advantage: true,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(format!("marl.{m}")));
        if !(0.0..=1.0).contains(&self.gamma) {
            return bad("gamma must lie in [0, 1]");
        }
        if !(self.actor_lr > 0.0) || !(self.critic_lr > 0.0) {
            return bad("learning rates must be positive");
        }
        if !(0.0..1.0).contains(&self.rms_decay) || !(self.rms_epsilon > 0.0) {
            return bad("rms_decay must lie in [0, 1) and rms_epsilon be positive");
        }
        if self.hidden.is_empty() || self.hidden.contains(&0) {
            return bad("hidden layer widths must be positive");
        }
        if self.batch == 0 || self.minibatch == 0 || self.minibatch > self.batch {
            return bad("batch and minibatch must be positive with minibatch <= batch");
        }
        if self.workers == 0 || self.workers > self.batch {
            return bad("workers must be in 1..=batch");
        }
        if self.episodes == 0 {
            return bad("episodes must be positive");
        }
        if !(self.entropy_coef >= 0.0) || self.association_entropy_coef.is_some_and(|c| !(c >= 0.0)) {
            return bad("entropy coefficients must be nonnegative");
        }
        if !(self.reward_scale > 0.0) || !self.reward_scale.is_finite() {
            return bad("reward_scale must be positive");
        }
        Ok(())
    }

    /// Reward as seen by the critic and the advantages.
    pub fn learning_reward(&self, reward: f64) -> f64 {
        let r = if self.compress_reward { crate::env::compress(reward) } else { reward };
        self.reward_scale * r
    }

    /// Per-head entropy weights in head order: lane 1, lane 2, x, y.
    pub fn head_entropy(&self) -> [f64; 4] {
        let assoc = self.association_entropy_coef.unwrap_or(self.entropy_coef);
        [assoc, assoc, self.entropy_coef, self.entropy_coef]
    }

    fn rms(&self, lr: f64) -> RmsPropConfig {
        RmsPropConfig { learning_rate: lr, decay: self.rms_decay, epsilon: self.rms_epsilon }
    }
}

/// Decentralized actors; what an agent needs at execution time.
#[derive(Debug, Clone, PartialEq)]
pub struct MarlPolicy {
    pub actors: Vec<Mlp>,
    pub space: ActionSpace,
}

impl MarlPolicy {
    pub fn probabilities(&self, agent: usize, obs: &[f64]) -> Result<Vec<f64>> {
        let logits = self.actors[agent].predict(obs)?;
        head_probabilities(&logits, &self.space.head_sizes())
    }

    pub fn act_greedy(&self, obs: &[Vec<f64>]) -> Result<Vec<[usize; 4]>> {
        obs.iter()
            .enumerate()
            .map(|(j, o)| Ok(to_raw(&greedy(&self.probabilities(j, o)?, &self.space.head_sizes()))))
            .collect()
    }

    pub fn act_sampled(&self, obs: &[Vec<f64>], rng: &mut ChaCha8Rng) -> Result<Vec<[usize; 4]>> {
        obs.iter()
            .enumerate()
            .map(|(j, o)| Ok(to_raw(&sample(&self.probabilities(j, o)?, &self.space.head_sizes(), rng))))
            .collect()
    }
}

fn to_raw(v: &[usize]) -> [usize; 4] {
    [v[0], v[1], v[2], v[3]]
}

/// Actors, central critic and their optimizers.
#[derive(Debug, Clone, PartialEq)]
pub struct Learners {
    pub policy: MarlPolicy,
    pub critic: CentralCritic,
    actor_opts: Vec<RmsProp>,
    critic_opt: RmsProp,
}

impl Learners {
    pub fn new(agents: usize, obs_dim: usize, space: ActionSpace, cfg: &TrainConfig, rng: &mut ChaCha8Rng) -> Result<Self> {
        let action_dim = space.one_hot_dim();
        let layers = |input: usize, output: usize| {
            let mut s = vec![input];
            s.extend(&cfg.hidden);
            s.push(output);
            s
        };
        let actors = (0..agents)
            .map(|_| Mlp::new(&layers(obs_dim, action_dim), rng))
            .collect::<Result<Vec<_>>>()?;
        let critic_net = Mlp::new(&layers(CentralCritic::input_dim(agents, obs_dim, action_dim), 1), rng)?;
        Learners::from_networks(actors, critic_net, space, cfg)
    }

    pub fn from_networks(actors: Vec<Mlp>, critic_net: Mlp, space: ActionSpace, cfg: &TrainConfig) -> Result<Self> {
        let agents = actors.len();
        let obs_dim = actors.first().map(Mlp::input_dim).unwrap_or(0);
        for a in &actors {
            if a.output_dim() != space.one_hot_dim() || a.input_dim() != obs_dim {
                return Err(Error::ShapeMismatch { expected: space.one_hot_dim(), got: a.output_dim() });
            }
        }
        let critic = CentralCritic::new(critic_net, agents, obs_dim, space.one_hot_dim())?;
        Ok(Learners {
            actor_opts: actors.iter().map(|a| RmsProp::new(cfg.rms(cfg.actor_lr), a.num_params())).collect(),
            critic_opt: RmsProp::new(cfg.rms(cfg.critic_lr), critic.net.num_params()),
            policy: MarlPolicy { actors, space },
            critic,
        })
    }

    pub fn is_finite(&self) -> bool {
        self.critic.net.is_finite() && self.policy.actors.iter().all(Mlp::is_finite)
    }

    /// One synchronous update from a recorded batch. Pure in
    /// `(self, batch, rng state)`.
    pub fn update(&mut self, batch: &[Transition], cfg: &TrainConfig, rng: &mut ChaCha8Rng) -> Result<UpdateLog> {
        let heads = self.policy.space.head_sizes();
        let space = self.policy.space;
        let agents = self.policy.actors.len();
        let enc: Vec<Encodings> = batch
            .iter()
            .map(|t| {
                let probs = |obs: &[Vec<f64>]| -> Result<Vec<Vec<f64>>> {
                    (0..agents).map(|j| self.policy.probabilities(j, &obs[j])).collect()
                };
                Ok(Encodings {
                    taken: t.actions.iter().map(|&a| space.one_hot(a)).collect(),
                    policy: probs(&t.obs)?,
                    next_policy: probs(&t.next_obs)?,
                })
            })
            .collect::<Result<_>>()?;

        let mut order: Vec<usize> = (0..batch.len()).collect();
        order.shuffle(rng);

        // critic: both Q(s, a) and V(s) = Q(s, pi(s)) regress on the same target
        let mut grads = vec![0.0; self.critic.net.num_params()];
        let mut critic_loss = 0.0;
        for chunk in order.chunks(cfg.minibatch) {
            grads.iter_mut().for_each(|g| *g = 0.0);
            for &i in chunk {
                let (t, e) = (&batch[i], &enc[i]);
                let next_v = if t.done { 0.0 } else { self.critic.value(&t.next_obs, &e.next_policy)? };
                let q_in = self.critic.input(&t.obs, &e.taken)?;
                critic_loss_and_grad(&self.critic.net, &q_in, cfg.learning_reward(t.reward), cfg.gamma, next_v, t.done, &mut grads)?;
                let v_in = self.critic.input(&t.obs, &e.policy)?;
                let step =
                    critic_loss_and_grad(&self.critic.net, &v_in, cfg.learning_reward(t.reward), cfg.gamma, next_v, t.done, &mut grads)?;
                critic_loss += step.loss;
            }
            let scale = 1.0 / chunk.len() as f64;
            grads.iter_mut().for_each(|g| *g *= scale);
            self.critic_opt.step(self.critic.net.params_mut(), &grads)?;
        }
        critic_loss /= batch.len() as f64;

        let mut kappas: Vec<f64> = batch
            .iter()
            .zip(&enc)
            .map(|(t, e)| {
                let v = self.critic.value(&t.obs, &e.policy)?;
                let next_v = if t.done { 0.0 } else { self.critic.value(&t.next_obs, &e.next_policy)? };
                Ok(advantage(cfg.learning_reward(t.reward), cfg.gamma, v, next_v, t.done))
            })
            .collect::<Result<_>>()?;
        if let Some(k) = kappas.iter().find(|k| !k.is_finite()) {
            return Err(Error::Divergence(format!("non-finite advantage {k}")));
        }
        let mean_advantage = kappas.iter().sum::<f64>() / kappas.len() as f64;
        if cfg.normalize_advantage && kappas.len() > 1 {
            let var = kappas.iter().map(|k| (k - mean_advantage).powi(2)).sum::<f64>() / kappas.len() as f64;
            let sd = var.sqrt().max(1e-8);
            kappas.iter_mut().for_each(|k| *k = (*k - mean_advantage) / sd);
        }

        let entropy = cfg.head_entropy();
        let mut actor_loss = vec![0.0; agents];
        for j in 0..agents {
            let actor = &mut self.policy.actors[j];
            let mut grads = vec![0.0; actor.num_params()];
            for chunk in order.chunks(cfg.minibatch) {
                grads.iter_mut().for_each(|g| *g = 0.0);
                for &i in chunk {
                    let t = &batch[i];
                    actor_loss[j] += actor_loss_and_grad(
                        actor,
                        &t.obs[j],
                        &heads,
                        &t.actions[j],
                        kappas[i],
                        &entropy,
                        &mut grads,
                    )?;
                }
                let scale = 1.0 / chunk.len() as f64;
                grads.iter_mut().for_each(|g| *g *= scale);
                self.actor_opts[j].step(actor.params_mut(), &grads)?;
            }
            actor_loss[j] /= batch.len() as f64;
        }

        if !self.is_finite() {
            return Err(Error::Divergence("non-finite network parameters after update".into()));
        }
        Ok(UpdateLog {
            update: 0,
            transitions: batch.len(),
            critic_loss,
            actor_loss,
            mean_advantage,
        })
    }
}

struct Encodings {
    taken: Vec<Vec<f64>>,
    policy: Vec<Vec<f64>>,
    next_policy: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub obs: Vec<Vec<f64>>,
    pub actions: Vec<[usize; 4]>,
    pub reward: f64,
    pub next_obs: Vec<Vec<f64>>,
    pub done: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeLog {
    pub episode: usize,
    pub worker: usize,
    pub cumulative_reward: f64,
    pub totals: EpisodeTotals,
    /// Updates applied before the episode finished.
    pub updates_before: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UpdateLog {
    pub update: usize,
    pub transitions: usize,
    pub critic_loss: f64,
    pub actor_loss: Vec<f64>,
    pub mean_advantage: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub learners: Learners,
    pub episodes: Vec<EpisodeLog>,
    pub updates: Vec<UpdateLog>,
}

struct Worker {
    env: Env,
    rng: ChaCha8Rng,
    obs: Vec<Vec<f64>>,
    episode_reward: f64,
}

struct Finished {
    cumulative_reward: f64,
    totals: EpisodeTotals,
}

impl Worker {
    fn collect(&mut self, policy: &MarlPolicy, quota: usize) -> Result<(Vec<Transition>, Vec<Finished>)> {
        let mut transitions = Vec::with_capacity(quota);
        let mut finished = Vec::new();
        for _ in 0..quota {
            let actions = policy.act_sampled(&self.obs, &mut self.rng)?;
            let out = self.env.step(&actions)?;
            self.episode_reward += out.reward;
            let obs = std::mem::replace(&mut self.obs, out.observations.clone());
            transitions.push(Transition { obs, actions, reward: out.reward, next_obs: out.observations, done: out.done });
            if out.done {
                finished.push(Finished { cumulative_reward: self.episode_reward, totals: self.env.totals() });
                self.episode_reward = 0.0;
                self.obs = self.env.reset();
            }
        }
        Ok((transitions, finished))
    }
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Trains until at least `cfg.episodes` episodes have finished.
pub fn train(scenario: Arc<Scenario>, weights: RewardWeights, cfg: &TrainConfig) -> Result<TrainOutcome> {
    cfg.validate()?;
    let probe = Env::new(Arc::clone(&scenario), weights)?;
    let mut rng = stream_rng(cfg.seed, 0);
    let mut learners = Learners::new(scenario.agents(), probe.obs_dim(), probe.action_space(), cfg, &mut rng)?;
    let mut workers: Vec<Worker> = (0..cfg.workers)
        .map(|w| {
            let mut env = probe.clone();
            let obs = env.reset();
            Worker { env, rng: stream_rng(cfg.seed, w as u64 + 1), obs, episode_reward: 0.0 }
        })
        .collect();

    let quotas: Vec<usize> =
        (0..cfg.workers).map(|w| cfg.batch / cfg.workers + usize::from(w < cfg.batch % cfg.workers)).collect();
    let mut episodes = Vec::new();
    let mut updates = Vec::new();
    while episodes.len() < cfg.episodes {
        let policy = &learners.policy;
        let results: Vec<Result<(Vec<Transition>, Vec<Finished>)>> =
            workers.par_iter_mut().zip(&quotas).map(|(w, &q)| w.collect(policy, q)).collect();
        let mut batch = Vec::with_capacity(cfg.batch);
        for (w, r) in results.into_iter().enumerate() {
            let (transitions, finished) = r?;
            batch.extend(transitions);
            for f in finished {
                episodes.push(EpisodeLog {
                    episode: episodes.len(),
                    worker: w,
                    cumulative_reward: f.cumulative_reward,
                    totals: f.totals,
                    updates_before: updates.len(),
                });
            }
        }
        let mut log = learners.update(&batch, cfg, &mut rng).map_err(|e| match e {
            Error::Divergence(m) => Error::Divergence(format!("update {}: {m}", updates.len())),
            other => other,
        })?;
        log.update = updates.len();
        updates.push(log);
    }
    Ok(TrainOutcome { learners, episodes, updates })
}

/// A full greedy episode.
#[derive(Debug, Clone)]
pub struct Rollout {
    pub steps: Vec<StepOutcome>,
    pub totals: EpisodeTotals,
    pub cumulative_reward: f64,
}

pub fn rollout_greedy(policy: &MarlPolicy, scenario: Arc<Scenario>, weights: RewardWeights) -> Result<Rollout> {
    let mut env = Env::new(scenario, weights)?;
    let mut obs = env.reset();
    let mut steps = Vec::with_capacity(env.scenario().slots);
    let mut cumulative_reward = 0.0;
    while !env.is_done() {
        let out = env.step(&policy.act_greedy(&obs)?)?;
        cumulative_reward += out.reward;
        obs = out.observations.clone();
        steps.push(out);
    }
    Ok(Rollout { steps, totals: env.totals(), cumulative_reward })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{Objective, RewardMode};

    fn weights() -> RewardWeights {
        RewardWeights {
            mu_rate: 1e5,
            sigma_rate: 5e4,
            mu_energy: 2000.0,
            sigma_energy: 2000.0,
            mu_distance: 1.5e6,
            sigma_distance: 1.5e6,
            d_max: 1.5e6,
            mode: RewardMode::BestEffort,
            objective: Objective::EeMax,
        }
    }

    fn tiny() -> TrainConfig {
        TrainConfig { hidden: vec![16], batch: 32, minibatch: 4, episodes: 6, workers: 2, ..TrainConfig::default() }
    }

    #[test]
    fn config_validation() {
        TrainConfig::default().validate().unwrap();
        assert!(TrainConfig { gamma: 1.5, ..tiny() }.validate().is_err());
        assert!(TrainConfig { minibatch: 64, ..tiny() }.validate().is_err());
        assert!(TrainConfig { workers: 0, ..tiny() }.validate().is_err());
    }

    #[test]
    fn same_seed_same_curve() {
        let scenario = Arc::new(Scenario::reference().with_slots(10));
        let a = train(Arc::clone(&scenario), weights(), &tiny()).unwrap();
        let b = train(Arc::clone(&scenario), weights(), &tiny()).unwrap();
        assert_eq!(a.updates, b.updates);
        assert_eq!(a.episodes, b.episodes);
        assert_eq!(a.learners, b.learners);
        let c = train(scenario, weights(), &TrainConfig { seed: 2, ..tiny() }).unwrap();
        assert_ne!(a.updates, c.updates);
        assert!(a.episodes.len() >= 6);
    }

    #[test]
    fn greedy_rollout_runs_full_episode() {
        let scenario = Arc::new(Scenario::reference().with_slots(7));
        let out = train(Arc::clone(&scenario), weights(), &tiny()).unwrap();
        let r = rollout_greedy(&out.learners.policy, scenario, weights()).unwrap();
        assert_eq!(r.steps.len(), 7);
        assert_eq!(r.totals.slots, 7);
    }
}
