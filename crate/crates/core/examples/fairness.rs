//! Best-effort against fairness rewards: first on fixed rate pairs, where
//! the sigmoid saturates as the sum grows, then with trained policies on the
//! desk scenario.
//!
//! cargo run --release --example fairness -- [episodes]

use ntn_marl::env::{reward_best_effort, reward_fairness, RewardMode};
use ntn_marl::experiment::{train_and_evaluate, Prepared};
use ntn_marl::ExperimentConfig;

fn main() -> ntn_marl::Result<()> {
    let mut cfg = ExperimentConfig::desk();
    if let Some(n) = std::env::args().nth(1).and_then(|a| a.parse().ok()) {
        cfg.marl.episodes = n;
    }
    let prepared = Prepared::new(cfg.clone())?;
    let w = prepared.weights;
    let energy = [w.mu_energy / 2.0; 2];
    println!("{:>22} {:>12} {:>12}", "path rates [Mbps]", "best-effort", "fairness");
    for (a, b) in [(0.1, 0.1), (0.2, 0.2), (0.4, 0.4), (0.8, 0.0)] {
        let rates = [a * 1e6, b * 1e6];
        let pair = 1.0e6;
        let be = reward_best_effort(rates.iter().sum(), energy.iter().sum(), &[pair], &w);
        let fair = reward_fairness(&rates, &energy, pair, &ntn_marl::env::RewardWeights { mode: RewardMode::Fairness, ..w })?;
        println!("{:>22} {be:>12.4} {fair:>12.4}", format!("{a:.2} + {b:.2}"));
    }

    let mut fair_cfg = cfg;
    fair_cfg.reward.mode = RewardMode::Fairness;
    for (label, prepared) in [("best-effort", prepared), ("fairness", Prepared::new(fair_cfg)?)] {
        let s = train_and_evaluate(&prepared)?.summary;
        println!(
            "{label:<12} sum {:.4} Mbps, worst path {:.4} Mbps",
            s.mean_sum_throughput / 1e6,
            s.mean_min_path / 1e6
        );
    }
    Ok(())
}
