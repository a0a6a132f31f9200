//! Reference schemes without learning: direct Src-Dst, satellite-only
//! chains, fixed ground relays with exhaustive association search, and the
//! per-slot association oracle for a recorded UAV trajectory.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{hybrid_rate, ChannelParams, LinkType};
use crate::dynamics::visible_sats;
use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::network::{evaluate_paths, Association, AssociationMatrix, PathRates, SlotGeometry};
use crate::scenario::Scenario;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Cooperation {
    Cooperative,
    NonCooperative,
}

/// One slot of a baseline run.
#[derive(Debug, Clone, PartialEq)]
pub struct BaselineSlot {
    pub slot: usize,
    /// E2E throughput of each path (bps).
    pub path_e2e: Vec<f64>,
    pub link_types: Vec<Vec<LinkType>>,
    /// 0-based satellite index per traversed lane, per path.
    pub associations: Vec<Vec<usize>>,
    pub relays: Vec<Vec3>,
}

impl BaselineSlot {
    pub fn sum_throughput(&self) -> f64 {
        self.path_e2e.iter().sum()
    }

    fn from_paths(slot: usize, paths: &[PathRates], assoc: &AssociationMatrix, relays: &[Vec3]) -> Self {
        BaselineSlot {
            slot,
            path_e2e: paths.iter().map(|p| p.e2e).collect(),
            link_types: paths.iter().map(|p| p.link_types.to_vec()).collect(),
            associations: assoc.per_agent.iter().map(|a| vec![a.lane1, a.lane2]).collect(),
            relays: relays.to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaselineRun {
    pub label: String,
    pub slots: Vec<BaselineSlot>,
}

impl BaselineRun {
    pub fn mean_sum_throughput(&self) -> f64 {
        if self.slots.is_empty() {
            return 0.0;
        }
        self.slots.iter().map(BaselineSlot::sum_throughput).sum::<f64>() / self.slots.len() as f64
    }

    pub fn mean_min_path(&self) -> f64 {
        if self.slots.is_empty() {
            return 0.0;
        }
        let mins = self.slots.iter().map(|s| s.path_e2e.iter().copied().fold(f64::INFINITY, f64::min));
        mins.sum::<f64>() / self.slots.len() as f64
    }
}

fn per_slot<F>(slots: usize, f: F) -> Result<Vec<BaselineSlot>>
where
    F: Fn(usize) -> Result<BaselineSlot> + Sync + Send,
{
    (0..slots).into_par_iter().map(f).collect()
}

pub fn run_direct(scenario: &Scenario) -> Result<BaselineRun> {
    let (rate, kind) = hybrid_rate(scenario.src.distance(scenario.dst), &scenario.channel)?;
    let slots = (0..scenario.slots)
        .map(|slot| BaselineSlot {
            slot,
            path_e2e: vec![rate],
            link_types: vec![vec![kind]],
            associations: vec![vec![]],
            relays: vec![],
        })
        .collect();
    Ok(BaselineRun { label: "direct".into(), slots })
}

/// Best chain Src -> lane_1 -> ... -> lane_K -> Dst with one satellite
/// per lane. `K = 1` uses lane 1, `K = 2` both relay lanes, `K = 3` adds the
/// middle lane between them.
pub fn run_sat_only(scenario: &Scenario, lanes: usize) -> Result<BaselineRun> {
    let chain = match lanes {
        1 => vec![&scenario.lanes[0]],
        2 => vec![&scenario.lanes[0], &scenario.lanes[1]],
        3 => vec![&scenario.lanes[0], &scenario.middle_lane, &scenario.lanes[1]],
        k => return Err(Error::invalid(format!("satellite-only chain supports 1 to 3 lanes, got {k}"))),
    };
    let p = &scenario.channel;
    let slots = per_slot(scenario.slots, |slot| {
        let sats: Vec<Vec<Vec3>> =
            chain.iter().map(|l| visible_sats(l, slot).into_iter().map(|s| s.position).collect()).collect();
        let total: usize = sats.iter().map(Vec::len).product();
        let mut best: Option<(f64, Vec<usize>, Vec<LinkType>)> = None;
        for mut idx in 0..total {
            let mut pick = vec![0; sats.len()];
            for (k, lane) in sats.iter().enumerate().rev() {
                pick[k] = idx % lane.len();
                idx /= lane.len();
            }
            let mut nodes = vec![scenario.src];
            nodes.extend(pick.iter().zip(&sats).map(|(&i, lane)| lane[i]));
            nodes.push(scenario.dst);
            let mut e2e = f64::INFINITY;
            let mut kinds = Vec::with_capacity(nodes.len() - 1);
            for w in nodes.windows(2) {
                let (r, kind) = hybrid_rate(w[0].distance(w[1]), p)?;
                e2e = e2e.min(r);
                kinds.push(kind);
            }
            if best.as_ref().map_or(true, |(b, _, _)| e2e > *b) {
                best = Some((e2e, pick, kinds));
            }
        }
        let (e2e, pick, kinds) = best.expect("at least one satellite per lane");
        Ok(BaselineSlot { slot, path_e2e: vec![e2e], link_types: vec![kinds], associations: vec![pick], relays: vec![] })
    })?;
    Ok(BaselineRun { label: format!("sat_only_k{lanes}"), slots })
}

/// Exhaustive search over all `visible^(2J)` joint associations; the lowest
/// joint index wins ties.
pub fn best_association(
    geom: &SlotGeometry,
    relays: &[Vec3],
    params: &ChannelParams,
) -> Result<(AssociationMatrix, Vec<PathRates>)> {
    let visible = geom.lane1.len().min(geom.lane2.len());
    let joint = visible.checked_pow(2 * relays.len() as u32).ok_or_else(|| Error::invalid("joint space too large"))?;
    let mut best: Option<(f64, AssociationMatrix, Vec<PathRates>)> = None;
    for idx in 0..joint {
        let assoc = AssociationMatrix::from_joint_index(idx, relays.len(), visible);
        let paths = evaluate_paths(geom, relays, &assoc, params)?;
        let total: f64 = paths.iter().map(|p| p.e2e).sum();
        if best.as_ref().map_or(true, |(b, _, _)| total > *b) {
            best = Some((total, assoc, paths));
        }
    }
    let (_, assoc, paths) = best.ok_or_else(|| Error::invalid("no relays"))?;
    Ok((assoc, paths))
}

/// Each relay maximizes its own path as if alone; splits apply afterwards.
pub fn selfish_association(geom: &SlotGeometry, relays: &[Vec3], params: &ChannelParams) -> Result<AssociationMatrix> {
    let visible = geom.lane1.len().min(geom.lane2.len());
    let mut per_agent = Vec::with_capacity(relays.len());
    for &q in relays {
        let mut best: Option<(f64, Association)> = None;
        for idx in 0..visible * visible {
            let a = Association::new(idx / visible, idx % visible);
            let e2e = evaluate_paths(geom, &[q], &AssociationMatrix::new(vec![a]), params)?[0].e2e;
            if best.map_or(true, |(b, _)| e2e > b) {
                best = Some((e2e, a));
            }
        }
        per_agent.push(best.expect("visible > 0").1);
    }
    Ok(AssociationMatrix::new(per_agent))
}

/// Fixed relays at altitude zero.
pub fn run_sat_ground(scenario: &Scenario, relays: &[Vec3], mode: Cooperation) -> Result<BaselineRun> {
    if relays.is_empty() {
        return Err(Error::invalid("ground baseline needs at least one relay"));
    }
    let p = &scenario.channel;
    let slots = per_slot(scenario.slots, |slot| {
        let geom = scenario.geometry(slot);
        let (assoc, paths) = match mode {
            Cooperation::Cooperative => best_association(&geom, relays, p)?,
            Cooperation::NonCooperative => {
                let assoc = selfish_association(&geom, relays, p)?;
                let paths = evaluate_paths(&geom, relays, &assoc, p)?;
                (assoc, paths)
            }
        };
        Ok(BaselineSlot::from_paths(slot, &paths, &assoc, relays))
    })?;
    let label = match mode {
        Cooperation::Cooperative => format!("sat_ground_j{}_coop", relays.len()),
        Cooperation::NonCooperative => format!("sat_ground_j{}_noncoop", relays.len()),
    };
    Ok(BaselineRun { label, slots })
}

/// Optimal associations along a recorded trajectory; `trajectory[n]` holds
/// every relay's position in slot `n`.
pub fn frozen_uav_oracle(scenario: &Scenario, trajectory: &[Vec<Vec3>]) -> Result<BaselineRun> {
    if trajectory.len() > scenario.slots {
        return Err(Error::invalid(format!(
            "trajectory has {} slots, scenario only {}",
            trajectory.len(),
            scenario.slots
        )));
    }
    let slots = per_slot(trajectory.len(), |slot| {
        let geom = scenario.geometry(slot);
        let (assoc, paths) = best_association(&geom, &trajectory[slot], &scenario.channel)?;
        Ok(BaselineSlot::from_paths(slot, &paths, &assoc, &trajectory[slot]))
    })?;
    Ok(BaselineRun { label: "frozen_uav_oracle".into(), slots })
}

/// Mean and largest absolute deviation of the cooperative ground-relay sum
/// throughput; the reward throughput normalizers.
pub fn rate_normalizers(scenario: &Scenario) -> Result<(f64, f64)> {
    let run = run_sat_ground(scenario, &scenario.ground_relays(), Cooperation::Cooperative)?;
    let mean = run.mean_sum_throughput();
    let spread = run.slots.iter().map(|s| (s.sum_throughput() - mean).abs()).fold(0.0, f64::max);
    Ok((mean, if spread > 0.0 { spread } else { mean.abs().max(1.0) }))
}
