//! Fixed-wing propulsion power against speed, and the energy of a short
//! accelerate-then-cruise flight.

use ntn_marl::dynamics::{step_uav, UavState};
use ntn_marl::energy::{episode_kinetic_correction, slot_energy, uav_power, PowerParams};
use ntn_marl::Vec3;

fn main() -> ntn_marl::Result<()> {
    let p = PowerParams::default();
    println!("best cruise speed {:.2} m/s at {:.2} W", p.best_speed(), p.min_steady_power());
    for v in [3.0, 10.0, 20.0, 30.0, 40.0, 60.0, 100.0] {
        println!("  {v:5.1} m/s -> {:9.2} W", uav_power(Vec3::new(v, 0.0, 0.0), Vec3::ZERO, &p));
    }
    // a 90 degree turn at 30 m/s costs extra through the normal acceleration
    let turning = uav_power(Vec3::new(30.0, 0.0, 0.0), Vec3::new(0.0, 3.0, 0.0), &p);
    println!("  30.0 m/s with 3 m/s^2 lateral -> {turning:.2} W");

    let dt = 10.0;
    let mut uav = UavState::new(0, Vec3::from_km(2000.0, 2000.0, 50.0), Vec3::ZERO);
    let start_velocity = uav.velocity;
    let mut energy = 0.0;
    for slot in 0..20 {
        let accel = if slot < 3 { Vec3::new(1.0, 0.0, 0.0) } else { Vec3::ZERO };
        energy += slot_energy(uav_power(uav.velocity, accel, &p), dt);
        uav = step_uav(&uav, accel, dt, 5.0)?;
    }
    energy += episode_kinetic_correction(start_velocity, uav.velocity, p.mass_kg);
    println!(
        "20 slots: ends at {:.1} m/s after {:.2} km, {:.1} kJ ({:.1} W mean)",
        uav.velocity.norm(),
        (uav.position.x - 2000e3) / 1e3,
        energy / 1e3,
        energy / (20.0 * dt)
    );
    Ok(())
}
