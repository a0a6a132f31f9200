//! TOML experiment configuration. Lengths are given in km and converted to
//! meters when the [`Scenario`] is built.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::baselines::rate_normalizers;
use crate::channel::{ChannelParams, ChannelSettings};
use crate::dynamics::OrbitalLane;
use crate::energy::PowerParams;
use crate::env::{Objective, RewardMode, RewardWeights};
use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::marl::TrainConfig;
use crate::scenario::Scenario;

pub const DEFAULT_CONFIG: &str = include_str!("../configs/default.cfg");
pub const DESK_CONFIG: &str = include_str!("../configs/desk.cfg");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSection {
    pub slot_s: f64,
    pub slots: usize,
    pub src_km: [f64; 3],
    pub dst_km: [f64; 3],
    pub uav_altitude_km: f64,
    pub uav_start_xy_km: Vec<[f64; 2]>,
    #[serde(default)]
    pub uav_start_velocity_mps: Option<Vec<[f64; 2]>>,
    pub a_max_mps2: f64,
    pub accel_levels: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LaneSection {
    pub x_km: f64,
    pub y_start_km: f64,
    pub altitude_km: f64,
    pub speed_kmps: f64,
    pub segment_km: f64,
    pub circumference_km: f64,
    pub spacing_km: f64,
    pub visible: usize,
    #[serde(default)]
    pub phase_km: f64,
}

impl LaneSection {
    fn build(&self, index: usize, dt: f64) -> OrbitalLane {
        OrbitalLane {
            index,
            x: self.x_km * 1e3,
            y_start: self.y_start_km * 1e3,
            altitude: self.altitude_km * 1e3,
            speed: self.speed_kmps * 1e3,
            segment_length: self.segment_km * 1e3,
            circumference: self.circumference_km * 1e3,
            spacing: self.spacing_km * 1e3,
            visible: self.visible,
            phase: self.phase_km * 1e3,
            dt,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LanesSection {
    pub lane1: LaneSection,
    pub lane2: LaneSection,
    pub middle: LaneSection,
}

/// Reward shaping. Omitted normalizers are calibrated: the throughput pair
/// from the cooperative ground-relay baseline, the energy pair from the
/// minimum steady-flight power.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RewardSection {
    pub mode: RewardMode,
    pub objective: Objective,
    pub d_max_km: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate_mean_bps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate_spread_bps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub energy_mean_j: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub energy_spread_j: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaselineSection {
    pub single_relay_xy_km: [f64; 2],
}

impl Default for BaselineSection {
    fn default() -> Self {
        BaselineSection { single_relay_xy_km: [2000.0, 2000.0] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: ScenarioSection,
    pub lanes: LanesSection,
    pub channel: ChannelSettings,
    pub power: PowerParams,
    pub reward: RewardSection,
    pub marl: TrainConfig,
    #[serde(default)]
    pub baseline: BaselineSection,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        ExperimentConfig::from_toml(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    /// Full-length reference experiment.
    pub fn reference() -> Self {
        ExperimentConfig::from_toml(DEFAULT_CONFIG).expect("bundled default config")
    }

    /// Reduced experiment for quick runs.
    pub fn desk() -> Self {
        ExperimentConfig::from_toml(DESK_CONFIG).expect("bundled desk config")
    }

    pub fn validate(&self) -> Result<()> {
        self.scenario()?;
        self.marl.validate()?;
        if !(self.reward.d_max_km > 0.0) {
            return Err(Error::Config("reward.d_max_km must be positive".into()));
        }
        for (name, v) in [("rate_spread_bps", self.reward.rate_spread_bps), ("energy_spread_j", self.reward.energy_spread_j)] {
            if let Some(v) = v {
                if !(v > 0.0) {
                    return Err(Error::Config(format!("reward.{name} must be positive")));
                }
            }
        }
        Ok(())
    }

    pub fn scenario(&self) -> Result<Scenario> {
        let sc = &self.scenario;
        let dt = sc.slot_s;
        let altitude = sc.uav_altitude_km * 1e3;
        let velocities = match &sc.uav_start_velocity_mps {
            Some(v) if v.len() != sc.uav_start_xy_km.len() => {
                return Err(Error::Config(format!(
                    "scenario.uav_start_velocity_mps has {} entries for {} UAVs",
                    v.len(),
                    sc.uav_start_xy_km.len()
                )))
            }
            Some(v) => v.iter().map(|&[x, y]| Vec3::new(x, y, 0.0)).collect(),
            None => vec![Vec3::ZERO; sc.uav_start_xy_km.len()],
        };
        let [sx, sy] = self.baseline.single_relay_xy_km;
        let scenario = Scenario {
            dt,
            slots: sc.slots,
            src: Vec3::from_km(sc.src_km[0], sc.src_km[1], sc.src_km[2]),
            dst: Vec3::from_km(sc.dst_km[0], sc.dst_km[1], sc.dst_km[2]),
            lanes: [self.lanes.lane1.build(0, dt), self.lanes.lane2.build(1, dt)],
            middle_lane: self.lanes.middle.build(2, dt),
            uav_start: sc.uav_start_xy_km.iter().map(|&[x, y]| Vec3::new(x * 1e3, y * 1e3, altitude)).collect(),
            uav_start_velocity: velocities,
            single_relay_xy: (sx * 1e3, sy * 1e3),
            a_max: sc.a_max_mps2,
            accel_levels: sc.accel_levels,
            channel: ChannelParams::new(&self.channel)?,
            power: self.power.clone(),
        };
        scenario.validate()?;
        Ok(scenario)
    }

    /// Resolves the reward normalizers for `scenario`, running the
    /// calibration baseline when the throughput pair is not configured.
    pub fn reward_weights(&self, scenario: &Scenario) -> Result<RewardWeights> {
        let r = &self.reward;
        let (mu_rate, sigma_rate) = match (r.rate_mean_bps, r.rate_spread_bps) {
            (Some(m), Some(s)) => (m, s),
            (m, s) => {
                let (cm, cs) = rate_normalizers(scenario)?;
                (m.unwrap_or(cm), s.unwrap_or(cs))
            }
        };
        let steady = scenario.agents() as f64 * scenario.dt * scenario.power.min_steady_power();
        let mu_energy = r.energy_mean_j.unwrap_or(steady);
        let d_max = r.d_max_km * 1e3;
        let w = RewardWeights {
            mu_rate,
            sigma_rate,
            mu_energy,
            sigma_energy: r.energy_spread_j.unwrap_or(mu_energy),
            mu_distance: d_max,
            sigma_distance: d_max,
            d_max,
            mode: r.mode,
            objective: r.objective,
        };
        w.validate()?;
        Ok(w)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Hex SHA-256 of the canonical serialization.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_toml().as_bytes()))
    }
}
