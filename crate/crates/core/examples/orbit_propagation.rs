//! Satellites sweeping the visible segment of each lane, and the period
//! after which a lane's visible set repeats.

use ntn_marl::dynamics::visible_sats;
use ntn_marl::Scenario;

fn main() {
    let scenario = Scenario::reference();
    for lane in &scenario.lanes {
        let period = lane.segment_length / lane.advance_per_slot();
        println!(
            "lane {}: x = {:.0} km, {:+.2} km/s, {} visible, repeats every {period:.1} slots",
            lane.index,
            lane.x / 1e3,
            lane.speed / 1e3,
            lane.visible
        );
        for slot in (0..=40).step_by(8) {
            let ys: Vec<String> =
                visible_sats(lane, slot).iter().map(|s| format!("{:8.1}", s.position.y / 1e3)).collect();
            println!("  slot {slot:3}: y [km] = {}", ys.join(" "));
        }
    }
}
