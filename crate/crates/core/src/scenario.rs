//! Fully resolved simulation setup in SI units.

use crate::channel::{ChannelParams, ChannelSettings};
use crate::dynamics::{visible_sats, OrbitalLane};
use crate::energy::PowerParams;
use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::network::SlotGeometry;

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    /// Slot length (s).
    pub dt: f64,
    /// Slots per episode.
    pub slots: usize,
    pub src: Vec3,
    pub dst: Vec3,
    /// Lane 1 serves Src, lane 2 serves Dst.
    pub lanes: [OrbitalLane; 2],
    /// Extra lane between the two, used only by the three-lane SAT-only baseline.
    pub middle_lane: OrbitalLane,
    /// Initial UAV positions (m); also the ground relay xy positions.
    pub uav_start: Vec<Vec3>,
    pub uav_start_velocity: Vec<Vec3>,
    /// Ground relay position used when a single relay is requested.
    pub single_relay_xy: (f64, f64),
    pub a_max: f64,
    /// Acceleration grid half-size D; each axis has 2D+1 levels.
    pub accel_levels: usize,
    pub channel: ChannelParams,
    pub power: PowerParams,
}

fn lane(index: usize, x_km: f64, speed_kmps: f64) -> OrbitalLane {
    OrbitalLane {
        index,
        x: x_km * 1e3,
        y_start: -1000e3,
        altitude: 550e3,
        speed: speed_kmps * 1e3,
        segment_length: 6000e3,
        circumference: 43_486e3,
        spacing: 1_977e3,
        visible: 3,
        phase: 0.0,
        dt: 10.0,
    }
}

impl Scenario {
    /// Two lanes, two UAVs, full-length episode with the reference
    /// parameter set.
    pub fn reference() -> Self {
        let altitude = 50e3;
        Scenario {
            dt: 10.0,
            slots: 572,
            src: Vec3::ZERO,
            dst: Vec3::from_km(4000.0, 4000.0, 0.0),
            lanes: [lane(0, 0.0, 7.59), lane(1, 4000.0, -7.59)],
            middle_lane: lane(2, 2000.0, 7.59),
            uav_start: vec![
                Vec3::new(2000e3, 2667e3, altitude),
                Vec3::new(2000e3, 1333e3, altitude),
            ],
            uav_start_velocity: vec![Vec3::ZERO; 2],
            single_relay_xy: (2000e3, 2000e3),
            a_max: 5.0,
            accel_levels: 5,
            channel: ChannelParams::new(&ChannelSettings::default()).expect("reference channel"),
            power: PowerParams::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || self.slots == 0 {
            return Err(Error::Config("slot length and slot count must be positive".into()));
        }
        for l in self.lanes.iter().chain(std::iter::once(&self.middle_lane)) {
            l.validate()?;
            if l.dt != self.dt {
                return Err(Error::Config(format!("lane {} slot length differs from scenario", l.index)));
            }
        }
        if self.lanes[0].visible != self.lanes[1].visible {
            return Err(Error::Config("both relay lanes must expose the same number of satellites".into()));
        }
        if self.uav_start.is_empty() || self.uav_start.len() != self.uav_start_velocity.len() {
            return Err(Error::Config("need at least one UAV and one start velocity per UAV".into()));
        }
        for v in &self.uav_start_velocity {
            if v.z != 0.0 {
                return Err(Error::Config("UAV start velocity must be horizontal".into()));
            }
        }
        let alt = self.uav_start[0].z;
        if self.uav_start.iter().any(|q| q.z != alt || q.z < 0.0) {
            return Err(Error::Config("all UAVs must share one nonnegative altitude".into()));
        }
        if !(self.a_max > 0.0) || self.accel_levels == 0 {
            return Err(Error::Config("a_max and accel_levels must be positive".into()));
        }
        self.power.validate()
    }

    pub fn agents(&self) -> usize {
        self.uav_start.len()
    }

    pub fn visible(&self) -> usize {
        self.lanes[0].visible
    }

    pub fn uav_altitude(&self) -> f64 {
        self.uav_start[0].z
    }

    /// Ground relays at the UAV start positions, altitude zero.
    pub fn ground_relays(&self) -> Vec<Vec3> {
        self.uav_start.iter().map(|q| Vec3::new(q.x, q.y, 0.0)).collect()
    }

    pub fn geometry(&self, slot: usize) -> SlotGeometry {
        let pos = |l: &OrbitalLane| visible_sats(l, slot).into_iter().map(|s| s.position).collect();
        SlotGeometry { src: self.src, dst: self.dst, lane1: pos(&self.lanes[0]), lane2: pos(&self.lanes[1]) }
    }

    /// Same scenario with a different episode length.
    pub fn with_slots(&self, slots: usize) -> Self {
        Scenario { slots, ..self.clone() }
    }
}
