//! The cooperative relay MDP: per-agent observations, factored discrete
//! actions, shared reward.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::channel::LinkType;
use crate::dynamics::{step_uav, UavState};
use crate::energy::{episode_kinetic_correction, slot_energy, uav_power};
use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::network::{
    evaluate_paths, link_distances, Association, AssociationMatrix, EfficiencyTracker, PathRates, SlotGeometry,
};
use crate::scenario::Scenario;

/// Position and distance normalizer (m).
pub const POSITION_SCALE: f64 = 6.0e6;
/// Velocity normalizer (m/s).
pub const VELOCITY_SCALE: f64 = 100.0;

/// `sign(x) ln(1 + |x|)`; keeps unbounded features near O(1).
pub fn compress(x: f64) -> f64 {
    x.signum() * x.abs().ln_1p()
}

pub fn observation_dim(visible: usize) -> usize {
    2 * visible * 3 + 3 + 3 + 4 + 1 + 1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RewardMode {
    BestEffort,
    Fairness,
}

/// Which reward terms are active.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    EeMax,
    RateMax,
    EnergyMin,
}

impl Objective {
    pub const ALL: [Objective; 3] = [Objective::RateMax, Objective::EnergyMin, Objective::EeMax];

    pub fn as_str(self) -> &'static str {
        match self {
            Objective::EeMax => "ee_max",
            Objective::RateMax => "rate_max",
            Objective::EnergyMin => "energy_min",
        }
    }

    fn rewards_throughput(self) -> bool {
        self != Objective::EnergyMin
    }

    fn penalizes_energy(self) -> bool {
        self != Objective::RateMax
    }
}

impl std::str::FromStr for Objective {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ee_max" => Ok(Objective::EeMax),
            "rate_max" => Ok(Objective::RateMax),
            "energy_min" => Ok(Objective::EnergyMin),
            other => Err(Error::Config(format!("unknown objective {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RewardWeights {
    pub mu_rate: f64,
    pub sigma_rate: f64,
    pub mu_energy: f64,
    pub sigma_energy: f64,
    pub mu_distance: f64,
    pub sigma_distance: f64,
    /// Maximum inter-UAV distance before the penalty kicks in (m).
    pub d_max: f64,
    pub mode: RewardMode,
    pub objective: Objective,
}

impl RewardWeights {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("sigma_rate", self.sigma_rate),
            ("sigma_energy", self.sigma_energy),
            ("sigma_distance", self.sigma_distance),
            ("d_max", self.d_max),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Config(format!("reward {name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

fn normalize(x: f64, mu: f64, sigma: f64) -> f64 {
    (x - mu) / sigma
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn distance_penalty(total: f64, w: &RewardWeights) -> f64 {
    normalize(total, w.mu_distance, w.sigma_distance).max(0.0)
}

/// Sum over unordered pairs of horizontal inter-UAV distances.
pub fn pair_distance_sum(positions: &[Vec3]) -> f64 {
    let mut total = 0.0;
    for (k, a) in positions.iter().enumerate() {
        for b in &positions[k + 1..] {
            total += a.distance(*b);
        }
    }
    total
}

/// Linear normalized reward on the sum rate and sum energy.
pub fn reward_best_effort(sum_rate: f64, sum_energy: f64, pair_distances: &[f64], w: &RewardWeights) -> f64 {
    let mut r = 0.0;
    if w.objective.rewards_throughput() {
        r += normalize(sum_rate, w.mu_rate, w.sigma_rate);
    }
    if w.objective.penalizes_energy() {
        r -= normalize(sum_energy, w.mu_energy, w.sigma_energy);
    }
    r - distance_penalty(pair_distances.iter().sum(), w)
}

/// Sigmoid-saturated throughput term; defined for two agents only.
pub fn reward_fairness(rates: &[f64], energies: &[f64], pair_distance: f64, w: &RewardWeights) -> Result<f64> {
    if rates.len() != 2 || energies.len() != 2 {
        return Err(Error::invalid(format!(
            "fairness reward needs exactly two agents, got {} rates and {} energies",
            rates.len(),
            energies.len()
        )));
    }
    let mut r = 0.0;
    if w.objective.rewards_throughput() {
        r += sigmoid(normalize(rates.iter().sum(), w.mu_rate, w.sigma_rate));
    }
    if w.objective.penalizes_energy() {
        r -= normalize(energies.iter().sum(), w.mu_energy, w.sigma_energy);
    }
    Ok(r - distance_penalty(pair_distance, w))
}

/// Factored action space: two association heads and two acceleration axes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActionSpace {
    pub visible: usize,
    /// D; each axis has 2D+1 levels.
    pub levels: usize,
    pub a_max: f64,
}

impl ActionSpace {
    pub fn new(visible: usize, levels: usize, a_max: f64) -> Self {
        ActionSpace { visible, levels, a_max }
    }

    pub fn head_sizes(&self) -> [usize; 4] {
        let axis = 2 * self.levels + 1;
        [self.visible, self.visible, axis, axis]
    }

    pub fn one_hot_dim(&self) -> usize {
        self.head_sizes().iter().sum()
    }

    /// Acceleration for grid index `k` in `0..=2D`.
    pub fn accel_level(&self, k: usize) -> f64 {
        (k as f64 - self.levels as f64) * self.a_max / self.levels as f64
    }

    pub fn decode(&self, raw: [usize; 4]) -> Result<AgentAction> {
        for (k, (&i, size)) in raw.iter().zip(self.head_sizes()).enumerate() {
            if i >= size {
                return Err(Error::invalid(format!("action head {k} index {i} outside 0..{size}")));
            }
        }
        Ok(AgentAction {
            raw,
            association: Association::new(raw[0], raw[1]),
            accel: Vec3::new(self.accel_level(raw[2]), self.accel_level(raw[3]), 0.0),
        })
    }

    pub fn one_hot(&self, raw: [usize; 4]) -> Vec<f64> {
        let mut out = vec![0.0; self.one_hot_dim()];
        let mut offset = 0;
        for (&i, size) in raw.iter().zip(self.head_sizes()) {
            out[offset + i] = 1.0;
            offset += size;
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgentAction {
    pub raw: [usize; 4],
    pub association: Association,
    /// Per-axis grid acceleration (m/s^2).
    pub accel: Vec3,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub observations: Vec<Vec<f64>>,
    pub reward: f64,
    pub done: bool,
    /// Slot the actions were applied in.
    pub slot: usize,
    pub paths: Vec<PathRates>,
    pub powers: Vec<f64>,
    pub energies: Vec<f64>,
    pub positions: Vec<Vec3>,
    pub associations: Vec<Association>,
}

impl StepOutcome {
    pub fn sum_throughput(&self) -> f64 {
        self.paths.iter().map(|p| p.e2e).sum()
    }

    pub fn link_types(&self) -> Vec<[LinkType; 4]> {
        self.paths.iter().map(|p| p.link_types).collect()
    }
}

/// Episode-level totals, with the kinetic-energy term applied once.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EpisodeTotals {
    pub bits: f64,
    pub energy: f64,
    pub slots: usize,
    pub mean_sum_throughput: f64,
    pub mean_power: f64,
    pub efficiency: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct Env {
    scenario: Arc<Scenario>,
    weights: RewardWeights,
    space: ActionSpace,
    slot: usize,
    uavs: Vec<UavState>,
    last_association: Vec<Association>,
    last_energy: Vec<f64>,
    tracker: EfficiencyTracker,
}

impl Env {
    pub fn new(scenario: Arc<Scenario>, weights: RewardWeights) -> Result<Self> {
        scenario.validate()?;
        weights.validate()?;
        if weights.mode == RewardMode::Fairness && scenario.agents() != 2 {
            return Err(Error::Config(format!(
                "fairness reward is defined for two agents, scenario has {}",
                scenario.agents()
            )));
        }
        let space = ActionSpace::new(scenario.visible(), scenario.accel_levels, scenario.a_max);
        let mut env = Env {
            scenario,
            weights,
            space,
            slot: 0,
            uavs: Vec::new(),
            last_association: Vec::new(),
            last_energy: Vec::new(),
            tracker: EfficiencyTracker::default(),
        };
        env.reset();
        Ok(env)
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn weights(&self) -> &RewardWeights {
        &self.weights
    }

    pub fn action_space(&self) -> ActionSpace {
        self.space
    }

    pub fn obs_dim(&self) -> usize {
        observation_dim(self.space.visible)
    }

    pub fn slot(&self) -> usize {
        self.slot
    }

    pub fn is_done(&self) -> bool {
        self.slot >= self.scenario.slots
    }

    pub fn uavs(&self) -> &[UavState] {
        &self.uavs
    }

    pub fn reset(&mut self) -> Vec<Vec<f64>> {
        let s = &self.scenario;
        self.slot = 0;
        self.uavs = s
            .uav_start
            .iter()
            .zip(&s.uav_start_velocity)
            .enumerate()
            .map(|(j, (&q, &v))| UavState::new(j, q, v))
            .collect();
        let geom = s.geometry(0);
        self.last_association = self
            .uavs
            .iter()
            .map(|u| Association::new(nearest(&geom.lane1, u.position), nearest(&geom.lane2, u.position)))
            .collect();
        self.last_energy = vec![0.0; self.uavs.len()];
        self.tracker = EfficiencyTracker::default();
        self.observations()
    }

    pub fn observations(&self) -> Vec<Vec<f64>> {
        let geom = self.scenario.geometry(self.slot.min(self.scenario.slots));
        (0..self.uavs.len()).map(|j| self.observe_with(j, &geom)).collect()
    }

    pub fn observe(&self, agent: usize) -> Result<Vec<f64>> {
        if agent >= self.uavs.len() {
            return Err(Error::invalid(format!("agent {agent} outside 0..{}", self.uavs.len())));
        }
        Ok(self.observe_with(agent, &self.scenario.geometry(self.slot)))
    }

    fn observe_with(&self, agent: usize, geom: &SlotGeometry) -> Vec<f64> {
        let mut obs = Vec::with_capacity(self.obs_dim());
        for sat in geom.lane1.iter().chain(&geom.lane2) {
            obs.extend(sat.to_array().map(|c| c / POSITION_SCALE));
        }
        let uav = &self.uavs[agent];
        obs.extend(uav.position.to_array().map(|c| c / POSITION_SCALE));
        obs.extend(uav.velocity.to_array().map(|c| compress(c / VELOCITY_SCALE)));
        let a = self.last_association[agent];
        let d = link_distances(geom.src, geom.dst, geom.lane1[a.lane1], uav.position, geom.lane2[a.lane2]);
        obs.extend(d.map(|x| x / POSITION_SCALE));
        obs.push(compress(self.last_energy[agent] / self.weights.mu_energy));
        obs.push(self.slot as f64 / self.scenario.slots as f64);
        obs
    }

    pub fn decode(&self, raw: &[[usize; 4]]) -> Result<Vec<AgentAction>> {
        if raw.len() != self.uavs.len() {
            return Err(Error::ShapeMismatch { expected: self.uavs.len(), got: raw.len() });
        }
        raw.iter().map(|&r| self.space.decode(r)).collect()
    }

    /// Applies one joint action: the chosen associations carry traffic in
    /// the current slot, then the UAVs move.
    pub fn step(&mut self, raw: &[[usize; 4]]) -> Result<StepOutcome> {
        if self.is_done() {
            return Err(Error::invalid("episode already finished; call reset"));
        }
        let actions = self.decode(raw)?;
        let s = Arc::clone(&self.scenario);
        let geom = s.geometry(self.slot);
        let assoc = AssociationMatrix::new(actions.iter().map(|a| a.association).collect());
        let positions: Vec<Vec3> = self.uavs.iter().map(|u| u.position).collect();
        let paths = evaluate_paths(&geom, &positions, &assoc, &s.channel)?;
        let powers: Vec<f64> =
            self.uavs.iter().zip(&actions).map(|(u, a)| uav_power(u.velocity, a.accel, &s.power)).collect();
        let energies: Vec<f64> = powers.iter().map(|&p| slot_energy(p, s.dt)).collect();

        let rates: Vec<f64> = paths.iter().map(|p| p.e2e).collect();
        let sum_rate: f64 = rates.iter().sum();
        let sum_energy: f64 = energies.iter().sum();
        let pair = pair_distance_sum(&positions);
        let reward = match self.weights.mode {
            RewardMode::BestEffort => reward_best_effort(sum_rate, sum_energy, &[pair], &self.weights),
            RewardMode::Fairness => reward_fairness(&rates, &energies, pair, &self.weights)?,
        };

        // the grid bounds each axis, not the norm
        let a_bound = s.a_max * std::f64::consts::SQRT_2;
        for (u, a) in self.uavs.iter_mut().zip(&actions) {
            *u = step_uav(u, a.accel, s.dt, a_bound)?;
        }
        self.tracker.record(sum_rate, s.dt, sum_energy);
        self.last_association = assoc.per_agent.clone();
        self.last_energy = energies.clone();
        let slot = self.slot;
        self.slot += 1;
        Ok(StepOutcome {
            observations: self.observations(),
            reward,
            done: self.is_done(),
            slot,
            paths,
            powers,
            energies,
            positions,
            associations: assoc.per_agent,
        })
    }

    /// Totals so far in this episode, including the kinetic-energy term.
    pub fn totals(&self) -> EpisodeTotals {
        let s = &self.scenario;
        let kinetic: f64 = self
            .uavs
            .iter()
            .zip(&s.uav_start_velocity)
            .map(|(u, &v0)| episode_kinetic_correction(v0, u.velocity, s.power.mass_kg))
            .sum();
        let energy = self.tracker.energy + kinetic;
        let slots = self.slot;
        let span = slots as f64 * s.dt;
        EpisodeTotals {
            bits: self.tracker.bits,
            energy,
            slots,
            mean_sum_throughput: if slots > 0 { self.tracker.bits / span } else { 0.0 },
            mean_power: if slots > 0 { energy / span / self.uavs.len() as f64 } else { 0.0 },
            efficiency: (energy > 0.0).then(|| self.tracker.bits / energy),
        }
    }
}

fn nearest(sats: &[Vec3], q: Vec3) -> usize {
    let mut best = 0;
    for (i, s) in sats.iter().enumerate() {
        if s.distance(q) < sats[best].distance(q) {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn weights(mode: RewardMode) -> RewardWeights {
        RewardWeights {
            mu_rate: 1e5,
            sigma_rate: 5e4,
            mu_energy: 2000.0,
            sigma_energy: 2000.0,
            mu_distance: 1.5e6,
            sigma_distance: 1.5e6,
            d_max: 1.5e6,
            mode,
            objective: Objective::EeMax,
        }
    }

    fn env(slots: usize) -> Env {
        Env::new(Arc::new(Scenario::reference().with_slots(slots)), weights(RewardMode::BestEffort)).unwrap()
    }

    #[test]
    fn observation_shape_and_fingerprint() {
        let mut e = env(4);
        let obs = e.reset();
        assert_eq!(obs.len(), 2);
        assert_eq!(obs[0].len(), 30);
        assert_eq!(observation_dim(3), 30);
        assert_eq!(obs[0][29], 0.0);
        assert_eq!(obs, e.observations());
        let mut last = Vec::new();
        for _ in 0..4 {
            last = e.step(&[[0, 0, 5, 5], [1, 1, 5, 5]]).unwrap().observations;
        }
        assert_eq!(last[0][29], 1.0);
        assert!(e.is_done());
        assert!(e.step(&[[0, 0, 5, 5], [1, 1, 5, 5]]).is_err());
    }

    #[test]
    fn decode_grid() {
        let space = ActionSpace::new(3, 5, 5.0);
        assert_eq!(space.head_sizes(), [3, 3, 11, 11]);
        assert_eq!(space.one_hot_dim(), 28);
        assert_eq!(space.decode([0, 0, 5, 5]).unwrap().accel, Vec3::ZERO);
        assert_eq!(space.decode([0, 0, 0, 10]).unwrap().accel, Vec3::new(-5.0, 5.0, 0.0));
        let levels: Vec<f64> = (0..11).map(|k| space.accel_level(k)).collect();
        assert_eq!(levels, vec![-5.0, -4.0, -3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0, 4.0, 5.0]);
        assert!(space.decode([3, 0, 5, 5]).is_err());
        assert!(space.decode([0, 0, 11, 5]).is_err());
        let hot = space.one_hot([2, 0, 10, 0]);
        assert_eq!(hot.iter().sum::<f64>(), 4.0);
        assert_eq!(hot[2], 1.0);
        assert_eq!(hot[3], 1.0);
        assert_eq!(hot[16], 1.0);
        assert_eq!(hot[17], 1.0);
    }

    #[test]
    fn episode_length_and_hover_energy() {
        let mut e = env(572);
        let mut steps = 0;
        loop {
            let out = e.step(&[[0, 0, 5, 5], [0, 0, 5, 5]]).unwrap();
            steps += 1;
            let p = &e.scenario().power;
            let clamped = p.c1 * 27.0 + p.c2 / 3.0;
            for &w in &out.energies {
                assert!((w - clamped * 10.0).abs() < 1e-9);
            }
            if out.done {
                break;
            }
        }
        assert_eq!(steps, 572);
    }

    #[test]
    fn centered_reward_is_zero() {
        let w = weights(RewardMode::BestEffort);
        assert_eq!(reward_best_effort(w.mu_rate, w.mu_energy, &[1.0e6], &w), 0.0);
        assert!(reward_best_effort(w.mu_rate * 2.0, w.mu_energy, &[0.0], &w) > 0.0);
        assert!(reward_best_effort(w.mu_rate, w.mu_energy * 2.0, &[0.0], &w) < 0.0);
        let far = reward_best_effort(w.mu_rate, w.mu_energy, &[3.0e6], &w);
        assert!((far + 1.0).abs() < 1e-12);
    }

    #[test]
    fn fairness_reward_shape() {
        let w = weights(RewardMode::Fairness);
        let mid = reward_fairness(&[w.mu_rate / 2.0, w.mu_rate / 2.0], &[1000.0, 1000.0], 0.0, &w).unwrap();
        assert!((mid - 0.5).abs() < 1e-12);
        let huge = reward_fairness(&[1e12, 1e12], &[1000.0, 1000.0], 0.0, &w).unwrap();
        assert!(huge <= 1.0 && huge > 0.999);
        assert!(reward_fairness(&[1.0], &[1.0], 0.0, &w).is_err());
        let three = Scenario {
            uav_start: vec![Vec3::new(0.0, 0.0, 50e3); 3],
            uav_start_velocity: vec![Vec3::ZERO; 3],
            ..Scenario::reference()
        };
        assert!(Env::new(Arc::new(three), w).is_err());
    }

    #[test]
    fn objectives_select_terms() {
        let mut w = weights(RewardMode::BestEffort);
        w.objective = Objective::RateMax;
        assert_eq!(reward_best_effort(w.mu_rate, 1e9, &[0.0], &w), 0.0);
        w.objective = Objective::EnergyMin;
        assert_eq!(reward_best_effort(1e12, w.mu_energy, &[0.0], &w), 0.0);
        assert_eq!("ee_max".parse::<Objective>().unwrap(), Objective::EeMax);
        assert!("max".parse::<Objective>().is_err());
    }

    #[test]
    fn shared_reward_and_determinism() {
        let run = || {
            let mut e = env(20);
            let mut rewards = Vec::new();
            for n in 0..20 {
                let out = e.step(&[[n % 3, 2, n % 11, 3], [1, n % 3, 7, n % 11]]).unwrap();
                rewards.push(out.reward.to_bits());
            }
            (rewards, e.totals())
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn totals_include_kinetic_term() {
        let mut e = env(3);
        for _ in 0..3 {
            e.step(&[[0, 0, 10, 5], [0, 0, 5, 5]]).unwrap();
        }
        let t = e.totals();
        // agent 0 ends at 150 m/s from rest
        let slot_sum: f64 = e.tracker.energy;
        assert!((t.energy - slot_sum - 0.5 * 10.0 * 150.0f64.powi(2)).abs() < 1e-6);
        assert!(t.efficiency.unwrap() > 0.0);
    }
}
