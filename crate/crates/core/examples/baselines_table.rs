//! Mean end-to-end throughput of every non-learned scheme on the reference
//! scenario.

use ntn_marl::experiment::{run_baselines, BaselineScheme};
use ntn_marl::ExperimentConfig;

fn main() -> ntn_marl::Result<()> {
    let scenario = ExperimentConfig::reference().scenario()?;
    println!("{} slots of {} s", scenario.slots, scenario.dt);
    println!("{:<24} {:>12} {:>14}", "scheme", "sum [Mbps]", "min path [Mbps]");
    for run in run_baselines(&scenario, BaselineScheme::All)? {
        println!("{:<24} {:>12.4} {:>14.4}", run.label, run.mean_sum_throughput() / 1e6, run.mean_min_path() / 1e6);
    }
    Ok(())
}
