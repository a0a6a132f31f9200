//! Multi-hop decode-and-forward paths Src -> SAT(lane 1) -> relay ->
//! SAT(lane 2) -> Dst, one per relay, with equal bandwidth splitting on
//! satellites shared by several relays.

use serde::{Deserialize, Serialize};

use crate::channel::{hybrid_rate, ChannelParams, LinkType};
use crate::error::{Error, Result};
use crate::geometry::Vec3;

/// Hop order along every path.
pub const HOP_NAMES: [&str; 4] = ["src_sat1", "sat1_relay", "relay_sat2", "sat2_dst"];

/// Satellite choice of one relay: 0-based indices into the visible
/// satellites of lane 1 and lane 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Association {
    pub lane1: usize,
    pub lane2: usize,
}

impl Association {
    pub fn new(lane1: usize, lane2: usize) -> Self {
        Association { lane1, lane2 }
    }
}

/// One satellite per lane per relay. The dense encoding makes the
/// "exactly one association per lane" constraint hold by construction.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AssociationMatrix {
    pub per_agent: Vec<Association>,
}

impl AssociationMatrix {
    pub fn new(per_agent: Vec<Association>) -> Self {
        AssociationMatrix { per_agent }
    }

    pub fn agents(&self) -> usize {
        self.per_agent.len()
    }

    pub fn validate(&self, visible: usize) -> Result<()> {
        for (j, a) in self.per_agent.iter().enumerate() {
            if a.lane1 >= visible || a.lane2 >= visible {
                return Err(Error::invalid(format!(
                    "agent {j} association ({}, {}) outside 0..{visible}",
                    a.lane1, a.lane2
                )));
            }
        }
        Ok(())
    }

    /// Decodes joint index `idx` in `0..visible^(2J)`; agent 0's lane-1
    /// choice is the most significant digit.
    pub fn from_joint_index(mut idx: usize, agents: usize, visible: usize) -> Self {
        let mut digits = vec![0; 2 * agents];
        for d in digits.iter_mut().rev() {
            *d = idx % visible;
            idx /= visible;
        }
        AssociationMatrix::new(digits.chunks(2).map(|c| Association::new(c[0], c[1])).collect())
    }

    /// Number of relays sharing each relay's lane-1 and lane-2 satellite.
    pub fn overlap_counts(&self) -> Vec<(usize, usize)> {
        self.per_agent
            .iter()
            .map(|a| {
                let m1 = self.per_agent.iter().filter(|b| b.lane1 == a.lane1).count();
                let m2 = self.per_agent.iter().filter(|b| b.lane2 == a.lane2).count();
                (m1, m2)
            })
            .collect()
    }
}

/// Distances of the four hops of one path (m).
pub fn link_distances(src: Vec3, dst: Vec3, sat1: Vec3, relay: Vec3, sat2: Vec3) -> [f64; 4] {
    [sat1.distance(src), relay.distance(sat1), sat2.distance(relay), dst.distance(sat2)]
}

/// Per-relay hop capacities after overlap splitting, with the link type
/// chosen on each hop.
pub fn effective_capacities(
    assoc: &AssociationMatrix,
    distances: &[[f64; 4]],
    params: &ChannelParams,
) -> Result<Vec<([f64; 4], [LinkType; 4])>> {
    if distances.len() != assoc.agents() {
        return Err(Error::ShapeMismatch { expected: assoc.agents(), got: distances.len() });
    }
    assoc
        .overlap_counts()
        .into_iter()
        .zip(distances)
        .map(|((m1, m2), d)| {
            let mut caps = [0.0; 4];
            let mut kinds = [LinkType::Rf; 4];
            for hop in 0..4 {
                let (c, kind) = hybrid_rate(d[hop], params)?;
                let share = if hop < 2 { m1 } else { m2 } as f64;
                caps[hop] = c / share;
                kinds[hop] = kind;
            }
            Ok((caps, kinds))
        })
        .collect()
}

/// End-to-end DF throughput: the bottleneck hop.
pub fn e2e_throughput(caps: &[f64; 4]) -> f64 {
    caps.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Rates and capacities of one relay's path in one slot.
#[derive(Debug, Clone, PartialEq)]
pub struct PathRates {
    pub distances: [f64; 4],
    pub capacities: [f64; 4],
    /// Largest rates satisfying information causality hop by hop.
    pub rates: [f64; 4],
    pub e2e: f64,
    pub link_types: [LinkType; 4],
}

impl PathRates {
    fn from_capacities(distances: [f64; 4], capacities: [f64; 4], link_types: [LinkType; 4]) -> Self {
        let mut rates = [0.0; 4];
        let mut upstream = f64::INFINITY;
        for (r, c) in rates.iter_mut().zip(capacities) {
            upstream = upstream.min(c);
            *r = upstream;
        }
        PathRates { distances, capacities, rates, e2e: rates[3], link_types }
    }
}

/// Endpoints and satellites of one slot.
#[derive(Debug, Clone, PartialEq)]
pub struct SlotGeometry {
    pub src: Vec3,
    pub dst: Vec3,
    pub lane1: Vec<Vec3>,
    pub lane2: Vec<Vec3>,
}

/// Evaluates every relay's path for the given association.
pub fn evaluate_paths(
    geom: &SlotGeometry,
    relays: &[Vec3],
    assoc: &AssociationMatrix,
    params: &ChannelParams,
) -> Result<Vec<PathRates>> {
    if relays.len() != assoc.agents() {
        return Err(Error::ShapeMismatch { expected: assoc.agents(), got: relays.len() });
    }
    assoc.validate(geom.lane1.len().min(geom.lane2.len()))?;
    let distances: Vec<[f64; 4]> = relays
        .iter()
        .zip(&assoc.per_agent)
        .map(|(&q, a)| link_distances(geom.src, geom.dst, geom.lane1[a.lane1], q, geom.lane2[a.lane2]))
        .collect();
    let caps = effective_capacities(assoc, &distances, params)?;
    Ok(distances
        .into_iter()
        .zip(caps)
        .map(|(d, (c, k))| PathRates::from_capacities(d, c, k))
        .collect())
}

/// Weights of the scalarized throughput-minus-energy objective.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalarizationWeights {
    pub throughput: f64,
    pub energy: f64,
}

impl Default for ScalarizationWeights {
    fn default() -> Self {
        ScalarizationWeights { throughput: 1e9, energy: 3e4 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SystemMetrics {
    pub sum_throughput: f64,
    pub sum_energy: f64,
    pub scalarized: f64,
}

pub fn system_step_metrics(
    paths: &[PathRates],
    energies: &[f64],
    weights: ScalarizationWeights,
) -> Result<SystemMetrics> {
    if paths.len() != energies.len() {
        return Err(Error::ShapeMismatch { expected: paths.len(), got: energies.len() });
    }
    let sum_throughput: f64 = paths.iter().map(|p| p.e2e).sum();
    let sum_energy: f64 = energies.iter().sum();
    Ok(SystemMetrics {
        sum_throughput,
        sum_energy,
        scalarized: weights.throughput * sum_throughput - weights.energy * sum_energy,
    })
}

/// Running totals for energy efficiency over an episode.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EfficiencyTracker {
    pub bits: f64,
    pub energy: f64,
}

impl EfficiencyTracker {
    pub fn record(&mut self, sum_throughput: f64, dt: f64, energy: f64) {
        self.bits += sum_throughput * dt;
        self.energy += energy;
    }

    /// Bits per Joule; `None` when no energy was spent.
    pub fn efficiency(&self) -> Option<f64> {
        (self.energy > 0.0).then(|| self.bits / self.energy)
    }
}

/// Slot throughput with fixed ground relays: no motion and no energy, so
/// efficiency is undefined and only throughput is reported.
pub fn ground_relay_metrics(
    geom: &SlotGeometry,
    relays: &[Vec3],
    assoc: &AssociationMatrix,
    params: &ChannelParams,
) -> Result<(Vec<PathRates>, f64)> {
    let paths = evaluate_paths(geom, relays, assoc, params)?;
    let total = paths.iter().map(|p| p.e2e).sum();
    Ok((paths, total))
}
