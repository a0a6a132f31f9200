//! Trains the EE-max policy on the desk scenario and saves a checkpoint.
//!
//! cargo run --release --example train_desk -- [episodes] [checkpoint path]

use std::path::PathBuf;

use ntn_marl::experiment::{checkpoint_of, train_and_evaluate, Prepared};
use ntn_marl::ExperimentConfig;

fn main() -> ntn_marl::Result<()> {
    let mut args = std::env::args().skip(1);
    let mut cfg = ExperimentConfig::desk();
    if let Some(n) = args.next() {
        cfg.marl.episodes = n.parse().map_err(|_| ntn_marl::Error::Config(format!("bad episode count {n:?}")))?;
    }
    let path = args.next().map_or_else(|| std::env::temp_dir().join("desk.ntn"), PathBuf::from);
    let prepared = Prepared::new(cfg)?;

    let run = train_and_evaluate(&prepared)?;
    let logs = &run.outcome.episodes;
    let window = (logs.len() / 10).max(1);
    println!("{:>9} {:>16} {:>14} {:>12}", "episodes", "mean return", "sum [Mbps]", "power [W]");
    for chunk in logs.chunks(window) {
        let n = chunk.len() as f64;
        println!(
            "{:>9} {:>16.2} {:>14.4} {:>12.1}",
            chunk[0].episode,
            chunk.iter().map(|e| e.cumulative_reward).sum::<f64>() / n,
            chunk.iter().map(|e| e.totals.mean_sum_throughput).sum::<f64>() / n / 1e6,
            chunk.iter().map(|e| e.totals.mean_power).sum::<f64>() / n,
        );
    }
    let s = &run.summary;
    println!(
        "greedy: {:.4} Mbps ({:.1}% of its trajectory oracle), {:.1} W per UAV",
        s.mean_sum_throughput / 1e6,
        100.0 * s.oracle_fraction(),
        s.mean_power
    );
    checkpoint_of(&run.outcome.learners, &prepared).save(&path)?;
    println!("checkpoint written to {}", path.display());
    Ok(())
}
