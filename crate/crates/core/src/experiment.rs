//! Experiment orchestration behind the `ntn` subcommands.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::baselines::{
    frozen_uav_oracle, run_direct, run_sat_ground, run_sat_only, BaselineRun, Cooperation,
};
use crate::channel::{find_crossovers, fso_rate, hybrid_rate, rf_rate, Crossover};
use crate::config::ExperimentConfig;
use crate::env::{Objective, RewardWeights};
use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::marl::{rollout_greedy, train, Checkpoint, Learners, MarlPolicy, Mlp, Rollout, TrainOutcome};
use crate::metrics::{
    fmt_f64, fso_share, write_slot_rows, write_training_curves, write_update_log, CsvSink, MetricsRow, Provenance,
};
use crate::scenario::Scenario;

pub const CHECKPOINT_FILE: &str = "checkpoint.ntn";

/// A config resolved into simulation objects.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub config: ExperimentConfig,
    pub scenario: Arc<Scenario>,
    pub weights: RewardWeights,
    pub hash: String,
}

impl Prepared {
    pub fn new(config: ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let scenario = config.scenario()?;
        let weights = config.reward_weights(&scenario)?;
        let hash = config.hash();
        Ok(Prepared { config, scenario: Arc::new(scenario), weights, hash })
    }

    pub fn provenance(&self, label: &str) -> Provenance {
        Provenance {
            config_hash: self.hash.clone(),
            seed: self.config.marl.seed,
            run_id: format!("{}-{}-s{}", label, &self.hash[..8], self.config.marl.seed),
        }
    }
}

/// Greedy-policy evaluation against its own-trajectory association oracle.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalSummary {
    pub mean_sum_throughput: f64,
    pub mean_min_path: f64,
    /// Per-UAV mean propulsion power (W).
    pub mean_power: f64,
    /// Bits per Joule.
    pub efficiency: Option<f64>,
    pub oracle_mean_sum_throughput: f64,
    pub fso_share: Vec<f64>,
    pub handovers: usize,
    pub cumulative_reward: f64,
}

impl EvalSummary {
    pub fn oracle_fraction(&self) -> f64 {
        if self.oracle_mean_sum_throughput > 0.0 {
            self.mean_sum_throughput / self.oracle_mean_sum_throughput
        } else {
            1.0
        }
    }
}

pub fn trajectory(rollout: &Rollout) -> Vec<Vec<Vec3>> {
    rollout.steps.iter().map(|s| s.positions.clone()).collect()
}

pub fn evaluate(policy: &MarlPolicy, prepared: &Prepared) -> Result<(Rollout, EvalSummary)> {
    let rollout = rollout_greedy(policy, Arc::clone(&prepared.scenario), prepared.weights)?;
    let oracle = frozen_uav_oracle(&prepared.scenario, &trajectory(&rollout))?;
    let n = rollout.steps.len().max(1) as f64;
    let mean_min_path = rollout
        .steps
        .iter()
        .map(|s| s.paths.iter().map(|p| p.e2e).fold(f64::INFINITY, f64::min))
        .sum::<f64>()
        / n;
    let handovers = rollout.steps.windows(2).filter(|w| w[0].associations != w[1].associations).count();
    let summary = EvalSummary {
        mean_sum_throughput: rollout.totals.mean_sum_throughput,
        mean_min_path,
        mean_power: rollout.totals.mean_power,
        efficiency: rollout.totals.efficiency,
        oracle_mean_sum_throughput: oracle.mean_sum_throughput(),
        fso_share: fso_share(rollout.steps.iter().flat_map(|s| s.paths.iter().map(|p| p.link_types.to_vec()))),
        handovers,
        cumulative_reward: rollout.cumulative_reward,
    };
    Ok((rollout, summary))
}

#[derive(Debug, Clone)]
pub struct TrainedRun {
    pub outcome: TrainOutcome,
    pub rollout: Rollout,
    pub summary: EvalSummary,
}

pub fn train_and_evaluate(prepared: &Prepared) -> Result<TrainedRun> {
    let outcome = train(Arc::clone(&prepared.scenario), prepared.weights, &prepared.config.marl)?;
    let (rollout, summary) = evaluate(&outcome.learners.policy, prepared)?;
    Ok(TrainedRun { outcome, rollout, summary })
}

pub fn checkpoint_of(learners: &Learners, prepared: &Prepared) -> Checkpoint {
    let mut nets: Vec<(String, Mlp)> =
        learners.policy.actors.iter().enumerate().map(|(j, a)| (format!("actor_{j}"), a.clone())).collect();
    nets.push(("critic".into(), learners.critic.net.clone()));
    Checkpoint { seed: prepared.config.marl.seed, config_hash: prepared.hash.clone(), nets }
}

/// Rebuilds the actors, checking their shapes against the scenario.
pub fn policy_from_checkpoint(ck: &Checkpoint, prepared: &Prepared) -> Result<MarlPolicy> {
    let env = crate::env::Env::new(Arc::clone(&prepared.scenario), prepared.weights)?;
    let space = env.action_space();
    let actors = (0..prepared.scenario.agents())
        .map(|j| {
            let net = ck.net(&format!("actor_{j}"))?;
            if net.input_dim() != env.obs_dim() {
                return Err(Error::ShapeMismatch { expected: env.obs_dim(), got: net.input_dim() });
            }
            if net.output_dim() != space.one_hot_dim() {
                return Err(Error::ShapeMismatch { expected: space.one_hot_dim(), got: net.output_dim() });
            }
            Ok(net.clone())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MarlPolicy { actors, space })
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    Ok(())
}

#[derive(Debug, Clone)]
pub struct TrainReport {
    pub checkpoint: PathBuf,
    pub episodes: usize,
    pub updates: usize,
    pub final_critic_loss: f64,
}

pub fn cmd_train(prepared: &Prepared, out: &Path) -> Result<TrainReport> {
    ensure_dir(out)?;
    let outcome = train(Arc::clone(&prepared.scenario), prepared.weights, &prepared.config.marl)?;
    let prov = prepared.provenance("train");
    write_training_curves(&out.join("train_episodes.csv"), &prov, &outcome.episodes)?;
    write_update_log(&out.join("train_updates.csv"), &prov, &outcome.updates)?;
    let checkpoint = out.join(CHECKPOINT_FILE);
    checkpoint_of(&outcome.learners, prepared).save(&checkpoint)?;
    Ok(TrainReport {
        checkpoint,
        episodes: outcome.episodes.len(),
        updates: outcome.updates.len(),
        final_critic_loss: outcome.updates.last().map_or(f64::NAN, |u| u.critic_loss),
    })
}

pub fn cmd_eval(prepared: &Prepared, checkpoint: &Path, out: &Path) -> Result<EvalSummary> {
    ensure_dir(out)?;
    let ck = Checkpoint::load(checkpoint)?;
    let policy = policy_from_checkpoint(&ck, prepared)?;
    let (rollout, summary) = evaluate(&policy, prepared)?;
    let prov = prepared.provenance("eval");
    let rows: Vec<MetricsRow> = rollout.steps.iter().map(|s| MetricsRow::from_step(&prov.run_id, 0, s)).collect();
    write_slot_rows(&out.join("eval.csv"), &prov, &rows)?;
    let mut header: Vec<String> = [
        "mean_sum_bps",
        "mean_min_path_bps",
        "mean_power_w",
        "ee_bits_per_j",
        "oracle_mean_sum_bps",
        "oracle_fraction",
        "handovers",
        "cumulative_reward",
    ]
    .map(String::from)
    .to_vec();
    header.extend((0..summary.fso_share.len()).map(|h| format!("fso_share_hop{h}")));
    let mut sink = CsvSink::create(&out.join("eval_summary.csv"), &prov, &header)?;
    let mut row = vec![
        fmt_f64(summary.mean_sum_throughput),
        fmt_f64(summary.mean_min_path),
        fmt_f64(summary.mean_power),
        summary.efficiency.map(fmt_f64).unwrap_or_default(),
        fmt_f64(summary.oracle_mean_sum_throughput),
        fmt_f64(summary.oracle_fraction()),
        summary.handovers.to_string(),
        fmt_f64(summary.cumulative_reward),
    ];
    row.extend(summary.fso_share.iter().map(|&x| fmt_f64(x)));
    sink.row(&row)?;
    sink.finish()?;
    Ok(summary)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaselineScheme {
    Direct,
    SatOnly,
    SatGround,
    All,
}

impl std::str::FromStr for BaselineScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "direct" => Ok(BaselineScheme::Direct),
            "sat_only" => Ok(BaselineScheme::SatOnly),
            "sat_ground" => Ok(BaselineScheme::SatGround),
            "all" => Ok(BaselineScheme::All),
            other => Err(Error::Config(format!("unknown baseline scheme {other:?}"))),
        }
    }
}

/// Runs the selected baselines; labels and runs in a fixed order.
pub fn run_baselines(scenario: &Scenario, scheme: BaselineScheme) -> Result<Vec<BaselineRun>> {
    let mut runs = Vec::new();
    let all = scheme == BaselineScheme::All;
    if all || scheme == BaselineScheme::Direct {
        runs.push(run_direct(scenario)?);
    }
    if all || scheme == BaselineScheme::SatOnly {
        for k in 1..=3 {
            runs.push(run_sat_only(scenario, k)?);
        }
    }
    if all || scheme == BaselineScheme::SatGround {
        let (x, y) = scenario.single_relay_xy;
        runs.push(run_sat_ground(scenario, &[Vec3::new(x, y, 0.0)], Cooperation::Cooperative)?);
        let relays = scenario.ground_relays();
        runs.push(run_sat_ground(scenario, &relays, Cooperation::NonCooperative)?);
        runs.push(run_sat_ground(scenario, &relays, Cooperation::Cooperative)?);
    }
    Ok(runs)
}

pub fn cmd_baseline(prepared: &Prepared, scheme: BaselineScheme, out: &Path) -> Result<Vec<(String, f64)>> {
    ensure_dir(out)?;
    let runs = run_baselines(&prepared.scenario, scheme)?;
    let prov = prepared.provenance("baseline");
    let mut summary = Vec::new();
    for run in &runs {
        write_slot_rows(&out.join(format!("baseline_{}.csv", run.label)), &prov, &MetricsRow::from_baseline(run))?;
        summary.push((run.label.clone(), run.mean_sum_throughput()));
    }
    let header = ["scheme", "mean_sum_mbps", "mean_min_path_mbps"].map(String::from);
    let mut sink = CsvSink::create(&out.join("baseline_summary.csv"), &prov, &header)?;
    for run in &runs {
        sink.row(&[
            run.label.clone(),
            fmt_f64(run.mean_sum_throughput() / 1e6),
            fmt_f64(run.mean_min_path() / 1e6),
        ])?;
    }
    sink.finish()?;
    Ok(summary)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub objective: Objective,
    pub summary: EvalSummary,
}

/// Copy of `config` that optimizes `objective`.
pub fn with_objective(config: &ExperimentConfig, objective: Objective) -> ExperimentConfig {
    let mut c = config.clone();
    c.reward.objective = objective;
    c
}

pub fn cmd_sweep(config: &ExperimentConfig, objectives: &[Objective], out: &Path) -> Result<Vec<SweepRow>> {
    ensure_dir(out)?;
    let base = Prepared::new(config.clone())?;
    let mut rows = Vec::new();
    for &objective in objectives {
        let mut prepared = base.clone();
        prepared.config = with_objective(config, objective);
        prepared.weights.objective = objective;
        prepared.hash = prepared.config.hash();
        let run = train_and_evaluate(&prepared)?;
        rows.push(SweepRow { objective, summary: run.summary });
    }
    let header =
        ["objective", "mean_sum_mbps", "mean_power_w", "ee_kbits_per_j", "mean_min_path_mbps"].map(String::from);
    let mut sink = CsvSink::create(&out.join("sweep.csv"), &base.provenance("sweep"), &header)?;
    for r in &rows {
        sink.row(&[
            r.objective.as_str().to_string(),
            fmt_f64(r.summary.mean_sum_throughput / 1e6),
            fmt_f64(r.summary.mean_power),
            r.summary.efficiency.map(|e| fmt_f64(e / 1e3)).unwrap_or_default(),
            fmt_f64(r.summary.mean_min_path / 1e6),
        ])?;
    }
    sink.finish()?;
    Ok(rows)
}

/// Rate curves over 1 km to 6000 km and the located crossings.
pub fn cmd_crossover(prepared: &Prepared, out: &Path) -> Result<Vec<Crossover>> {
    ensure_dir(out)?;
    let p = &prepared.scenario.channel;
    let prov = prepared.provenance("crossover");
    let header = ["distance_km", "rf_bps", "fso_bps", "hybrid_bps", "link"].map(String::from);
    let mut sink = CsvSink::create(&out.join("crossover.csv"), &prov, &header)?;
    for k in 1..=600 {
        let d = k as f64 * 10e3;
        let (h, kind) = hybrid_rate(d, p)?;
        sink.row(&[fmt_f64(d / 1e3), fmt_f64(rf_rate(d, p)?), fmt_f64(fso_rate(d, p)?), fmt_f64(h), kind.as_str().into()])?;
    }
    sink.finish()?;
    let crossings = find_crossovers(p, 1e3, 6e6, 4000)?;
    let header = ["distance_km", "better_below"].map(String::from);
    let mut sink = CsvSink::create(&out.join("crossings.csv"), &prov, &header)?;
    for c in &crossings {
        sink.row(&[fmt_f64(c.distance / 1e3), c.better_below.as_str().into()])?;
    }
    sink.finish()?;
    Ok(crossings)
}
