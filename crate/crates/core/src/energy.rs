//! Fixed-wing UAV propulsion power.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Vec3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerParams {
    /// Parasitic drag coefficient (kg/m).
    pub c1: f64,
    /// Induced drag coefficient; `c2 / |v|` is in Watts.
    pub c2: f64,
    #[serde(default = "default_gravity")]
    pub gravity: f64,
    pub mass_kg: f64,
    /// Speeds below this are clamped before evaluating the drag terms.
    pub v_min_mps: f64,
}

fn default_gravity() -> f64 {
    9.8
}

impl Default for PowerParams {
    fn default() -> Self {
        PowerParams { c1: 9.26e-4, c2: 2250.0, gravity: 9.8, mass_kg: 10.0, v_min_mps: 3.0 }
    }
}

impl PowerParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("c1", self.c1),
            ("c2", self.c2),
            ("gravity", self.gravity),
            ("mass_kg", self.mass_kg),
            ("v_min_mps", self.v_min_mps),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Config(format!("power.{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    /// Speed minimizing level steady-flight power, `(c2 / 3 c1)^(1/4)`.
    pub fn best_speed(&self) -> f64 {
        (self.c2 / (3.0 * self.c1)).powf(0.25)
    }

    /// Steady-flight power at the best speed.
    pub fn min_steady_power(&self) -> f64 {
        let v = self.best_speed().max(self.v_min_mps);
        self.c1 * v.powi(3) + self.c2 / v
    }
}

/// Propulsion power in Watts for velocity `v` and acceleration `a`.
///
/// The kinetic-energy term is not included; it telescopes over an episode
/// and is applied once by [`episode_kinetic_correction`].
pub fn uav_power(v: Vec3, a: Vec3, p: &PowerParams) -> f64 {
    let raw = v.norm();
    let speed = raw.max(p.v_min_mps);
    let along = if raw > 0.0 { a.dot(v).powi(2) / (raw * raw) } else { 0.0 };
    let normal = (a.norm_squared() - along).max(0.0);
    p.c1 * speed.powi(3) + (p.c2 / speed) * (1.0 + normal / (p.gravity * p.gravity))
}

pub fn slot_energy(power: f64, dt: f64) -> f64 {
    power * dt
}

/// Change in kinetic energy over an episode, `(m/2)(|v_end|^2 - |v_start|^2)`.
pub fn episode_kinetic_correction(v_start: Vec3, v_end: Vec3, mass: f64) -> f64 {
    0.5 * mass * (v_end.norm_squared() - v_start.norm_squared())
}
