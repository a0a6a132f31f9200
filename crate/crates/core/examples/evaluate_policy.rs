//! Greedy rollout of a saved checkpoint on the desk scenario, slot by slot.
//!
//! cargo run --release --example evaluate_policy -- [checkpoint path]

use std::path::PathBuf;

use ntn_marl::experiment::{evaluate, policy_from_checkpoint, Prepared};
use ntn_marl::marl::Checkpoint;
use ntn_marl::ExperimentConfig;

fn main() -> ntn_marl::Result<()> {
    let path = std::env::args().nth(1).map_or_else(|| std::env::temp_dir().join("desk.ntn"), PathBuf::from);
    let prepared = Prepared::new(ExperimentConfig::desk())?;
    let checkpoint = Checkpoint::load(&path)?;
    if checkpoint.config_hash != prepared.hash {
        eprintln!("note: checkpoint was trained under a different config");
    }
    let policy = policy_from_checkpoint(&checkpoint, &prepared)?;
    let (rollout, summary) = evaluate(&policy, &prepared)?;

    println!("{:>5} {:>12} {:>10} {:>22}", "slot", "sum [Mbps]", "power [W]", "associations");
    for step in rollout.steps.iter().step_by(10) {
        let assoc: Vec<String> =
            step.associations.iter().map(|a| format!("{}-{}", a.lane1 + 1, a.lane2 + 1)).collect();
        let sum: f64 = step.paths.iter().map(|p| p.e2e).sum();
        println!(
            "{:>5} {:>12.4} {:>10.1} {:>22}",
            step.slot,
            sum / 1e6,
            step.powers.iter().sum::<f64>() / step.powers.len() as f64,
            assoc.join(" ")
        );
    }
    println!(
        "mean {:.4} Mbps, oracle on the same trajectory {:.4} Mbps, {} handovers",
        summary.mean_sum_throughput / 1e6,
        summary.oracle_mean_sum_throughput / 1e6,
        summary.handovers
    );
    Ok(())
}
