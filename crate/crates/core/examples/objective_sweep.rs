//! Trains one policy per objective on the desk scenario and compares power
//! and efficiency.
//!
//! cargo run --release --example objective_sweep -- [episodes] [seed]

use ntn_marl::env::Objective;
use ntn_marl::experiment::{train_and_evaluate, with_objective, Prepared};
use ntn_marl::ExperimentConfig;

fn main() -> ntn_marl::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let mut cfg = ExperimentConfig::desk();
    if let Some(n) = args.first().and_then(|a| a.parse().ok()) {
        cfg.marl.episodes = n;
    }
    if let Some(seed) = args.get(1).and_then(|a| a.parse().ok()) {
        cfg.marl.seed = seed;
    }
    println!("{:<12} {:>12} {:>12} {:>14}", "objective", "sum [Mbps]", "power [W]", "EE [kbit/J]");
    for objective in Objective::ALL {
        let s = train_and_evaluate(&Prepared::new(with_objective(&cfg, objective))?)?.summary;
        println!(
            "{:<12} {:>12.4} {:>12.1} {:>14.4}",
            objective.as_str(),
            s.mean_sum_throughput / 1e6,
            s.mean_power,
            s.efficiency.unwrap_or(0.0) / 1e3
        );
    }
    Ok(())
}
