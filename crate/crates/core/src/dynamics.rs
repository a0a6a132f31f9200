//! Discrete-time kinematics for UAV relays and satellites on straight orbital
//! line segments.
//!
//! Satellites on a lane are tracked by an along-track coordinate that is
//! reduced modulo the segment length, so the handful of satellites visible
//! over the area of interest re-enter at the far end of the segment as they
//! leave the near end.

use crate::error::{Error, Result};
use crate::geometry::Vec3;

const ACCEL_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UavState {
    pub id: usize,
    pub position: Vec3,
    pub velocity: Vec3,
}

impl UavState {
    pub fn new(id: usize, position: Vec3, velocity: Vec3) -> Self {
        UavState { id, position, velocity }
    }
}

/// Advances one UAV by one slot of length `dt` seconds under constant
/// horizontal acceleration.
pub fn step_uav(state: &UavState, accel: Vec3, dt: f64, a_max: f64) -> Result<UavState> {
    if accel.z != 0.0 {
        return Err(Error::invalid(format!(
            "vertical acceleration must be zero, got {}",
            accel.z
        )));
    }
    if !accel.is_finite() || accel.norm() > a_max * (1.0 + ACCEL_TOLERANCE) {
        return Err(Error::invalid(format!(
            "acceleration norm {} exceeds A_max {}",
            accel.norm(),
            a_max
        )));
    }
    let velocity = state.velocity + accel * dt;
    let position = state.position + state.velocity * dt + accel * (0.5 * dt * dt);
    Ok(UavState { id: state.id, position, velocity })
}

/// A satellite lane approximated as a line segment parallel to the y-axis.
#[derive(Debug, Clone, PartialEq)]
pub struct OrbitalLane {
    pub index: usize,
    /// Lane x coordinate (m).
    pub x: f64,
    /// y coordinate where the segment starts (m).
    pub y_start: f64,
    /// Satellite altitude (m).
    pub altitude: f64,
    /// Signed along-track speed (m/s); positive moves toward +y.
    pub speed: f64,
    /// Segment length c_C (m).
    pub segment_length: f64,
    /// Full lane circumference c_E (m).
    pub circumference: f64,
    /// Inter-satellite spacing (m).
    pub spacing: f64,
    /// Number of satellites tracked on the segment.
    pub visible: usize,
    /// Along-track offset of the first satellite at slot 0 (m).
    pub phase: f64,
    /// Slot length (s).
    pub dt: f64,
}

impl OrbitalLane {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(format!("lane {}: {msg}", self.index)));
        if !(self.spacing > 0.0) {
            return bad(format!("spacing must be positive, got {}", self.spacing));
        }
        if !(self.segment_length > 0.0) || self.segment_length > self.circumference {
            return bad(format!(
                "segment length {} must be positive and at most the circumference {}",
                self.segment_length, self.circumference
            ));
        }
        if !(self.dt > 0.0) {
            return bad(format!("slot length must be positive, got {}", self.dt));
        }
        if self.altitude < 0.0 {
            return bad(format!("altitude must be nonnegative, got {}", self.altitude));
        }
        let ratio = self.segment_length / self.spacing;
        let lo = (ratio - 1e-9).floor().max(1.0) as usize;
        let hi = (ratio + 1e-9).ceil().max(1.0) as usize;
        if self.visible < lo || self.visible > hi {
            return bad(format!(
                "visible satellite count {} inconsistent with segment/spacing ratio {:.4}",
                self.visible, ratio
            ));
        }
        if (self.visible - 1) as f64 * self.spacing >= self.segment_length {
            return bad("satellites do not fit on the segment".to_string());
        }
        Ok(())
    }

    /// Distance a satellite advances per slot (m, unsigned).
    pub fn advance_per_slot(&self) -> f64 {
        self.speed.abs() * self.dt
    }

    /// Along-track coordinate of satellite `local_index` (1-based) at `slot`.
    pub fn along_track(&self, local_index: usize, slot: usize) -> f64 {
        let start = self.phase + (local_index as f64 - 1.0) * self.spacing;
        (start + self.speed * self.dt * slot as f64).rem_euclid(self.segment_length)
    }

    fn point_at(&self, along: f64) -> Vec3 {
        Vec3::new(self.x, self.y_start + along, self.altitude)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SatSnapshot {
    pub lane: usize,
    /// 1-based index within the visible set.
    pub local_index: usize,
    pub position: Vec3,
}

/// Position of satellite `local_index` (1-based, by initial ordering) at `slot`.
pub fn propagate_sat(lane: &OrbitalLane, local_index: usize, slot: usize) -> Result<SatSnapshot> {
    if local_index == 0 || local_index > lane.visible {
        return Err(Error::invalid(format!(
            "local index {local_index} outside 1..={}",
            lane.visible
        )));
    }
    Ok(SatSnapshot {
        lane: lane.index,
        local_index,
        position: lane.point_at(lane.along_track(local_index, slot)),
    })
}

/// The satellites on the segment at `slot`, renumbered 1..=I' in increasing
/// along-track order.
pub fn visible_sats(lane: &OrbitalLane, slot: usize) -> Vec<SatSnapshot> {
    let mut along: Vec<f64> = (1..=lane.visible).map(|i| lane.along_track(i, slot)).collect();
    along.sort_by(f64::total_cmp);
    along
        .into_iter()
        .enumerate()
        .map(|(k, s)| SatSnapshot { lane: lane.index, local_index: k + 1, position: lane.point_at(s) })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn default_lane() -> OrbitalLane {
        OrbitalLane {
            index: 0,
            x: 0.0,
            y_start: -1.0e6,
            altitude: 550e3,
            speed: 7590.0,
            segment_length: 6.0e6,
            circumference: 43_486e3,
            spacing: 1_977e3,
            visible: 3,
            phase: 0.0,
            dt: 10.0,
        }
    }

    fn uav(v: Vec3) -> UavState {
        UavState::new(0, Vec3::new(100.0, 200.0, 50e3), v)
    }

    #[test]
    fn step_identity_and_uniform_motion() {
        let s = uav(Vec3::ZERO);
        let n = step_uav(&s, Vec3::ZERO, 10.0, 5.0).unwrap();
        assert_eq!(n.position, s.position);
        assert_eq!(n.velocity, Vec3::ZERO);

        let s = uav(Vec3::new(1.0, 0.0, 0.0));
        let n = step_uav(&s, Vec3::ZERO, 10.0, 5.0).unwrap();
        assert_eq!(n.position - s.position, Vec3::new(10.0, 0.0, 0.0));
    }

    #[test]
    fn step_constant_acceleration() {
        let s = uav(Vec3::ZERO);
        let n = step_uav(&s, Vec3::new(0.5, 0.0, 0.0), 10.0, 5.0).unwrap();
        assert_eq!(n.velocity, Vec3::new(5.0, 0.0, 0.0));
        assert_eq!(n.position - s.position, Vec3::new(25.0, 0.0, 0.0));
        assert_eq!(n.position.z, s.position.z);
    }

    #[test]
    fn step_rejects_bad_acceleration() {
        let s = uav(Vec3::ZERO);
        assert!(step_uav(&s, Vec3::new(5.0, 5.0, 0.0), 10.0, 5.0).is_err());
        assert!(step_uav(&s, Vec3::new(0.0, 0.0, 0.1), 10.0, 5.0).is_err());
        assert!(step_uav(&s, Vec3::new(5.0, 0.0, 0.0), 10.0, 5.0).is_ok());
    }

    #[test]
    fn slot_zero_is_initial_offset() {
        let lane = default_lane();
        for i in 1..=3 {
            let snap = propagate_sat(&lane, i, 0).unwrap();
            let expected = lane.y_start + (i as f64 - 1.0) * lane.spacing;
            assert!((snap.position.y - expected).abs() < 1e-6);
            assert_eq!(snap.position.z, lane.altitude);
        }
        assert!(propagate_sat(&lane, 0, 0).is_err());
        assert!(propagate_sat(&lane, 4, 0).is_err());
    }

    #[test]
    fn segment_wraps_after_eighty_slots() {
        let lane = default_lane();
        assert!((lane.advance_per_slot() - 75.9e3).abs() < 1e-6);
        let wrap = (lane.segment_length / lane.advance_per_slot()).ceil() as usize;
        assert_eq!(wrap, 80);
        let s0 = lane.along_track(1, 0);
        let s1 = lane.along_track(1, wrap);
        let diff = (s1 - s0).rem_euclid(lane.segment_length);
        assert!(diff <= lane.advance_per_slot(), "diff {diff}");
        // one slot earlier it has not yet come back around
        let before = lane.along_track(1, wrap - 1);
        assert!(before > s0 + lane.segment_length - lane.advance_per_slot() * 1.5);
    }

    #[test]
    fn full_orbit_matches_circumference() {
        let lane = default_lane();
        let travelled = 572.0 * lane.advance_per_slot();
        assert!((travelled - lane.circumference).abs() < lane.spacing);
    }

    #[test]
    fn visible_counts() {
        let lane = default_lane();
        assert_eq!(visible_sats(&lane, 17).len(), 3);
        let degenerate = OrbitalLane { segment_length: lane.spacing, visible: 1, ..lane.clone() };
        degenerate.validate().unwrap();
        assert_eq!(visible_sats(&degenerate, 5).len(), 1);
    }

    #[test]
    fn lane_validation() {
        let lane = default_lane();
        lane.validate().unwrap();
        assert!(OrbitalLane { visible: 5, ..lane.clone() }.validate().is_err());
        assert!(OrbitalLane { spacing: 0.0, ..lane.clone() }.validate().is_err());
        assert!(OrbitalLane { segment_length: 5e7, ..lane }.validate().is_err());
    }

    #[test]
    fn negative_speed_stays_in_segment() {
        let lane = OrbitalLane { speed: -7590.0, x: 4.0e6, ..default_lane() };
        for n in 0..600 {
            for s in visible_sats(&lane, n) {
                assert!(s.position.y >= lane.y_start && s.position.y < lane.y_start + lane.segment_length);
            }
        }
    }
}
