use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use ntn_marl::env::Objective;
use ntn_marl::experiment::{
    cmd_baseline, cmd_crossover, cmd_eval, cmd_sweep, cmd_train, BaselineScheme, Prepared, CHECKPOINT_FILE,
};
use ntn_marl::{Error, ExperimentConfig, Result};

#[derive(Parser, Debug)]
#[command(name = "ntn", version, about = "Satellite-UAV relay simulation and training")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// TOML config; the bundled reference config when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[arg(long, global = true)]
    seed: Option<u64>,

    #[arg(long, global = true, default_value = "runs")]
    out: PathBuf,

    /// ee_max, rate_max or energy_min.
    #[arg(long, global = true)]
    objective: Option<Objective>,

    /// direct, sat_only, sat_ground or all.
    #[arg(long, global = true, default_value = "all")]
    scheme: BaselineScheme,

    #[arg(long, global = true)]
    episodes_override: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Train actors and critic; writes a checkpoint and training curves.
    Train,
    /// Greedy rollout of a trained checkpoint.
    Eval {
        /// Defaults to the checkpoint inside --out.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
    },
    /// Non-learned reference schemes.
    Baseline,
    /// Train and evaluate each objective.
    Sweep,
    /// FSO and RF rate curves and their crossings.
    Crossover,
}

fn load(cli: &Cli) -> Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::reference(),
    };
    if let Some(seed) = cli.seed {
        cfg.marl.seed = seed;
    }
    if let Some(episodes) = cli.episodes_override {
        cfg.marl.episodes = episodes;
    }
    if let Some(objective) = cli.objective {
        cfg.reward.objective = objective;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var("NTN_THREADS") else { return Ok(()) };
    let threads: usize = raw
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::Config(format!("NTN_THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Error::Config(e.to_string()))
}

fn run(cli: Cli) -> Result<()> {
    configure_threads()?;
    let cfg = load(&cli)?;
    match &cli.command {
        Command::Train => {
            let report = cmd_train(&Prepared::new(cfg)?, &cli.out)?;
            println!(
                "trained {} episodes in {} updates; final critic loss {:.4e}; checkpoint {}",
                report.episodes,
                report.updates,
                report.final_critic_loss,
                report.checkpoint.display()
            );
        }
        Command::Eval { checkpoint } => {
            let path = checkpoint.clone().unwrap_or_else(|| cli.out.join(CHECKPOINT_FILE));
            let s = cmd_eval(&Prepared::new(cfg)?, &path, &cli.out)?;
            println!("mean sum throughput  {:.4} Mbps", s.mean_sum_throughput / 1e6);
            println!("oracle on trajectory {:.4} Mbps ({:.1}%)", s.oracle_mean_sum_throughput / 1e6, 100.0 * s.oracle_fraction());
            println!("mean power           {:.2} W", s.mean_power);
            if let Some(ee) = s.efficiency {
                println!("energy efficiency    {:.4} kbit/J", ee / 1e3);
            }
            let shares: Vec<String> = s.fso_share.iter().map(|x| format!("{:.0}%", 100.0 * x)).collect();
            println!("FSO share per hop    {}", shares.join(" "));
            println!("handovers            {}", s.handovers);
        }
        Command::Baseline => {
            for (label, mean) in cmd_baseline(&Prepared::new(cfg)?, cli.scheme, &cli.out)? {
                println!("{label:<24} {:.4} Mbps", mean / 1e6);
            }
        }
        Command::Sweep => {
            let objectives = match cli.objective {
                Some(o) => vec![o],
                None => Objective::ALL.to_vec(),
            };
            println!("{:<12} {:>12} {:>12} {:>14}", "objective", "sum [Mbps]", "power [W]", "EE [kbit/J]");
            for row in cmd_sweep(&cfg, &objectives, &cli.out)? {
                let s = row.summary;
                println!(
                    "{:<12} {:>12.4} {:>12.2} {:>14.4}",
                    row.objective.as_str(),
                    s.mean_sum_throughput / 1e6,
                    s.mean_power,
                    s.efficiency.unwrap_or(0.0) / 1e3
                );
            }
        }
        Command::Crossover => {
            for c in cmd_crossover(&Prepared::new(cfg)?, &cli.out)? {
                println!("{:.3} km ({} better below)", c.distance / 1e3, c.better_below.as_str());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
