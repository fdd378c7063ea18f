//! Exhaustive search for small instances, used as an oracle for the greedy
//! planner, and a constraint checker that applies to any plan.
//!
//! Formations are drawn from a finite family: every subset of targets, every
//! partition of that subset into branches, and for each branch either the
//! plain Steiner tree or one forced through a candidate relay position.
//! Compression levels range over each scenario's accuracy/size frontier.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::analyzer::{Level, QualityProfile};
use crate::error::{Error, Result};
use crate::geometry::{distance, Point2D};
use crate::model::{ScenarioConfig, Target, TargetId, UavId};
use crate::par::{self, Execution};
use crate::plan::{tree_routes, validate_plan, CompressionAssignment, Plan, PlanViolation};
use crate::planner::{path_edges, uav_assignment};
use crate::steiner::{tst, tst_with_hubs, TerminalSet};
use crate::tree::{CoverageTree, EdgeKey, NodeId, Role, TreeViolation, LENGTH_TOLERANCE};

pub const DEFAULT_MAX_TARGETS: usize = 3;
pub const DEFAULT_MAX_UAVS: usize = 6;
pub const DEFAULT_TIME_BUDGET: Duration = Duration::from_secs(60);

/// Relative slack on rate and conservation checks.
const RATE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactLimits {
    pub max_targets: usize,
    pub max_uavs: usize,
    pub time_budget: Duration,
    pub execution: Execution,
}

impl Default for ExactLimits {
    fn default() -> Self {
        Self {
            max_targets: DEFAULT_MAX_TARGETS,
            max_uavs: DEFAULT_MAX_UAVS,
            time_budget: DEFAULT_TIME_BUDGET,
            execution: Execution::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Derivation {
    TargetAnchored,
    Grid { step: f64 },
    TstNodes,
    Custom,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CandidateSet {
    pub positions: Vec<Point2D>,
    pub derivation: Derivation,
}

impl CandidateSet {
    pub fn new(
        positions: Vec<Point2D>,
        derivation: Derivation,
        cfg: &ScenarioConfig,
    ) -> Result<Self> {
        if positions.is_empty() {
            return Err(Error::InvalidParameter("candidate set is empty".into()));
        }
        if let Some(p) = positions.iter().find(|p| !cfg.contains(**p)) {
            return Err(Error::InvalidParameter(format!(
                "candidate ({}, {}) outside area",
                p.x, p.y
            )));
        }
        let mut seen = BTreeSet::new();
        let positions = positions
            .into_iter()
            .filter(|p| seen.insert(p.key()))
            .collect();
        Ok(Self {
            positions,
            derivation,
        })
    }

    /// The targets' own positions.
    pub fn target_anchored(cfg: &ScenarioConfig) -> Result<Self> {
        Self::new(
            cfg.targets.iter().map(|t| t.position).collect(),
            Derivation::TargetAnchored,
            cfg,
        )
    }

    /// Regular grid over the whole area, corners included.
    pub fn grid(cfg: &ScenarioConfig, step: f64) -> Result<Self> {
        if !(step > 0.0) {
            return Err(Error::InvalidParameter("grid step must be > 0".into()));
        }
        let nx = (cfg.area[0] / step).floor() as usize;
        let ny = (cfg.area[1] / step).floor() as usize;
        let mut positions = Vec::with_capacity((nx + 1) * (ny + 1));
        for i in 0..=nx {
            for j in 0..=ny {
                positions.push(Point2D::new(i as f64 * step, j as f64 * step));
            }
        }
        Self::new(positions, Derivation::Grid { step }, cfg)
    }

    /// Every relay position appearing in a Steiner tree over some subset of
    /// the targets.
    pub fn tst_nodes(cfg: &ScenarioConfig) -> Result<Self> {
        let targets = sorted_targets(cfg);
        let r = cfg.min_comm_radius();
        let mut positions = Vec::new();
        for mask in 1u32..(1 << targets.len()) {
            let tree = tst(&terminal_set(cfg, &targets, mask, r), cfg.link_rate);
            positions.extend(
                tree.nodes
                    .iter()
                    .filter(|n| n.role == Role::Relay)
                    .map(|n| n.position),
            );
        }
        if positions.is_empty() {
            positions = cfg.targets.iter().map(|t| t.position).collect();
        }
        Self::new(positions, Derivation::TstNodes, cfg)
    }

    pub fn union(&self, other: &CandidateSet, cfg: &ScenarioConfig) -> Result<Self> {
        let mut positions = self.positions.clone();
        positions.extend_from_slice(&other.positions);
        Self::new(positions, Derivation::Custom, cfg)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExactSolution {
    pub plan: Plan,
    pub objective: f64,
    pub optimal: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ConstraintViolation {
    /// formation or assignment structure
    Structure(PlanViolation),
    /// a UAV cannot fly out, hover and return
    Energy {
        uav: UavId,
        node: NodeId,
    },
    /// inspector farther than its UAV's sensing radius from its target
    Sensing {
        node: NodeId,
        target: TargetId,
        distance: f64,
    },
    /// a target covered more than once
    DuplicateCoverage(TargetId),
    /// link longer than its UAV endpoints can reach
    LinkRange {
        a: NodeId,
        b: NodeId,
        length: f64,
        limit: f64,
    },
    /// the edge server forwards traffic instead of absorbing it
    BaseForwards(TargetId),
    /// consecutive route hops that are not tree neighbors
    NonNeighborHop {
        target: TargetId,
        from: NodeId,
        to: NodeId,
    },
    /// node sends more than the nominal link rate
    RateCap {
        node: NodeId,
        load: f64,
        cap: f64,
    },
    /// node forwards to more than one next hop
    OutDegree(NodeId),
    /// flow into a node plus what it generates differs from its outflow
    FlowConservation {
        node: NodeId,
        imbalance: f64,
    },
    /// flow absorbed at the edge server differs from what targets generate
    SinkConservation {
        absorbed: f64,
        generated: f64,
    },
    /// accuracy delivered at the edge server differs from the covered sum
    AccuracyFlow {
        delivered: f64,
        expected: f64,
    },
    /// target without a route starting at its own inspector
    RouteOrigin(TargetId),
    UnknownScenario(String),
}

fn uav_on(plan: &Plan) -> BTreeMap<NodeId, UavId> {
    plan.assignment.iter().map(|(&u, &n)| (n, u)).collect()
}

/// Every constraint of the planning model violated by `plan`.
pub fn feasibility_check(
    plan: &Plan,
    cfg: &ScenarioConfig,
    p: &QualityProfile,
) -> Vec<ConstraintViolation> {
    use ConstraintViolation as V;
    let tree = &plan.formation;
    let mut out = Vec::new();
    for v in validate_plan(plan, cfg) {
        match v {
            PlanViolation::EnergyInfeasible { uav, node } => out.push(V::Energy { uav, node }),
            PlanViolation::Tree(TreeViolation::DuplicateCoverage(t)) => {
                out.push(V::DuplicateCoverage(t))
            }
            // range and sensing are rechecked below per assigned UAV
            PlanViolation::Tree(TreeViolation::EdgeTooLong { .. })
            | PlanViolation::Tree(TreeViolation::InspectorOutOfRange { .. }) => {}
            other => out.push(V::Structure(other)),
        }
    }
    let n = tree.nodes.len();
    let holders = uav_on(plan);
    let radius = |node: NodeId, f: fn(&crate::model::UavSpec) -> f64| -> Option<f64> {
        if node == CoverageTree::BASE {
            return None;
        }
        Some(match holders.get(&node).and_then(|u| cfg.uav(*u)) {
            Some(spec) => f(spec),
            None => cfg.uavs.iter().map(f).fold(f64::INFINITY, f64::min),
        })
    };
    for e in &tree.edges {
        if e.a.0 >= n || e.b.0 >= n {
            continue;
        }
        let limit = [
            radius(e.a, |u| u.comm_radius),
            radius(e.b, |u| u.comm_radius),
        ]
        .into_iter()
        .flatten()
        .fold(f64::INFINITY, f64::min);
        let length = distance(tree.position(e.a), tree.position(e.b));
        if length > limit + LENGTH_TOLERANCE {
            out.push(V::LinkRange {
                a: e.a,
                b: e.b,
                length,
                limit,
            });
        }
    }
    for (&node, &target) in &tree.covered {
        let (Some(tg), true) = (cfg.target(target), node.0 < n) else {
            continue;
        };
        let limit = radius(node, |u| u.sense_radius).unwrap_or(0.0);
        let d = distance(tree.position(node), tg.position);
        if d > limit + LENGTH_TOLERANCE {
            out.push(V::Sensing {
                node,
                target,
                distance: d,
            });
        }
    }

    // flows induced by routes at profile sizes
    let adjacent: BTreeSet<EdgeKey> = tree.edges.iter().map(|e| e.key()).collect();
    let mut directed: BTreeMap<(NodeId, NodeId), f64> = BTreeMap::new();
    let mut generated = vec![0.0; n];
    let mut total_generated = 0.0;
    let mut expected_accuracy = 0.0;
    let mut delivered_accuracy = 0.0;
    for (&target, route) in &plan.routes {
        let Some(tg) = cfg.target(target) else {
            continue;
        };
        let Some(&level) = plan.compression.levels.get(&target) else {
            continue;
        };
        let q = match p.query(&tg.scenario, level) {
            Ok(q) => q,
            Err(_) => {
                out.push(V::UnknownScenario(tg.scenario.clone()));
                continue;
            }
        };
        let load = q.size * tg.task_rate;
        expected_accuracy += q.accuracy;
        let origin = tree.inspector_of(target);
        if route.first().copied() != origin || origin.is_none() {
            out.push(V::RouteOrigin(target));
            continue;
        }
        if route.iter().any(|x| x.0 >= n) {
            continue;
        }
        if route[..route.len() - 1].contains(&CoverageTree::BASE) {
            out.push(V::BaseForwards(target));
        }
        generated[route[0].0] += load;
        total_generated += load;
        for w in route.windows(2) {
            if !adjacent.contains(&EdgeKey::new(w[0], w[1])) {
                out.push(V::NonNeighborHop {
                    target,
                    from: w[0],
                    to: w[1],
                });
            }
            *directed.entry((w[0], w[1])).or_insert(0.0) += load;
        }
        if route.last() == Some(&CoverageTree::BASE) {
            delivered_accuracy += q.accuracy;
        }
    }

    let mut inflow = vec![0.0; n];
    let mut outflow = vec![0.0; n];
    let mut next_hops: Vec<BTreeSet<NodeId>> = vec![BTreeSet::new(); n];
    for (&(a, b), &load) in &directed {
        outflow[a.0] += load;
        inflow[b.0] += load;
        next_hops[a.0].insert(b);
    }
    let cap = cfg.link_rate;
    for i in 1..n {
        let node = NodeId(i);
        if outflow[i] > cap * (1.0 + RATE_TOLERANCE) {
            out.push(V::RateCap {
                node,
                load: outflow[i],
                cap,
            });
        }
        if next_hops[i].len() > 1 {
            out.push(V::OutDegree(node));
        }
        let imbalance = inflow[i] + generated[i] - outflow[i];
        if imbalance.abs() > RATE_TOLERANCE * cap.max(outflow[i]) {
            out.push(V::FlowConservation { node, imbalance });
        }
    }
    if n > 0 {
        let absorbed = inflow[0] - outflow[0];
        if (absorbed - total_generated).abs() > RATE_TOLERANCE * total_generated.max(1.0) {
            out.push(V::SinkConservation {
                absorbed,
                generated: total_generated,
            });
        }
    }
    if (delivered_accuracy - expected_accuracy).abs() > 1e-9 {
        out.push(V::AccuracyFlow {
            delivered: delivered_accuracy,
            expected: expected_accuracy,
        });
    }
    out
}

/// Weighted objective: accuracy delivered, targets covered, distance flown.
pub fn objective_value(plan: &Plan, cfg: &ScenarioConfig, p: &QualityProfile) -> Result<f64> {
    let v = feasibility_check(plan, cfg, p);
    if let Some(first) = v.first() {
        return Err(Error::InfeasiblePlan(format!(
            "{} violation(s), first: {first:?}",
            v.len()
        )));
    }
    objective_unchecked(plan, cfg, p)
}

fn objective_unchecked(plan: &Plan, cfg: &ScenarioConfig, p: &QualityProfile) -> Result<f64> {
    let w = cfg.objective_weights;
    let mut accuracy = 0.0;
    for t in plan.formation.covered_targets() {
        let tg = cfg.target(t).ok_or(Error::UnknownTarget(t))?;
        let level = plan
            .compression
            .levels
            .get(&t)
            .copied()
            .unwrap_or(Level::LOWEST);
        accuracy += p.query(&tg.scenario, level)?.accuracy;
    }
    Ok(
        w.accuracy * accuracy + w.coverage * plan.covered_count() as f64
            - w.travel * plan.travel_distance(cfg),
    )
}

fn sorted_targets(cfg: &ScenarioConfig) -> Vec<&Target> {
    let mut t: Vec<_> = cfg.targets.iter().collect();
    t.sort_by_key(|t| t.id);
    t
}

fn terminal_set(cfg: &ScenarioConfig, targets: &[&Target], mask: u32, r: f64) -> TerminalSet {
    TerminalSet {
        base: cfg.edge,
        terminals: targets
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .map(|(_, t)| (t.id, t.position))
            .collect(),
        comm_radius: r,
    }
}

/// All partitions of the set bits of `mask` into nonempty blocks, in a
/// fixed order.
fn partitions(mask: u32) -> Vec<Vec<u32>> {
    let bits: Vec<u32> = (0..32).filter(|b| mask & (1 << b) != 0).collect();
    let mut out = Vec::new();
    let mut assign = vec![0usize; bits.len()];
    fn rec(
        i: usize,
        blocks: usize,
        bits: &[u32],
        assign: &mut Vec<usize>,
        out: &mut Vec<Vec<u32>>,
    ) {
        if i == bits.len() {
            let mut b = vec![0u32; blocks];
            for (k, &bit) in bits.iter().enumerate() {
                b[assign[k]] |= 1 << bit;
            }
            out.push(b);
            return;
        }
        for blk in 0..=blocks {
            assign[i] = blk;
            rec(i + 1, blocks.max(blk + 1), bits, assign, out);
        }
    }
    rec(0, 0, &bits, &mut assign, &mut out);
    out
}

struct Search<'a> {
    cfg: &'a ScenarioConfig,
    p: &'a QualityProfile,
    /// per target index: frontier levels with (accuracy, load)
    options: Vec<Vec<(Level, f64, f64)>>,
    peak: Vec<f64>,
    /// per block mask: candidate branch trees
    structures: BTreeMap<u32, Vec<CoverageTree>>,
    targets: Vec<&'a Target>,
    deadline: Instant,
    timed_out: AtomicBool,
    best_bits: AtomicU64,
}

struct Found {
    objective: f64,
    key: Vec<usize>,
    plan: Plan,
}

impl Found {
    fn beats(&self, other: &Found) -> bool {
        self.objective > other.objective
            || (self.objective == other.objective && self.key < other.key)
    }
}

impl<'a> Search<'a> {
    fn shared_best(&self) -> f64 {
        f64::from_bits(self.best_bits.load(Ordering::Relaxed))
    }

    fn offer(&self, v: f64) {
        let _ = self
            .best_bits
            .fetch_update(Ordering::Relaxed, Ordering::Relaxed, |cur| {
                (v > f64::from_bits(cur)).then_some(v.to_bits())
            });
    }

    fn out_of_time(&self) -> bool {
        if Instant::now() > self.deadline {
            self.timed_out.store(true, Ordering::Relaxed);
        }
        self.timed_out.load(Ordering::Relaxed)
    }

    fn target_index(&self, id: TargetId) -> usize {
        self.targets
            .iter()
            .position(|t| t.id == id)
            .expect("known target")
    }

    /// Most accurate level vector whose per-node outflow fits the link rate.
    fn best_levels(
        &self,
        formation: &CoverageTree,
        routes: &BTreeMap<TargetId, Vec<NodeId>>,
    ) -> Option<(f64, Vec<usize>)> {
        let flows: Vec<(usize, Vec<usize>)> = {
            let mut edge_ix: BTreeMap<EdgeKey, usize> = BTreeMap::new();
            routes
                .iter()
                .map(|(id, path)| {
                    let edges = path_edges(path)
                        .map(|e| {
                            let k = edge_ix.len();
                            *edge_ix.entry(e).or_insert(k)
                        })
                        .collect();
                    (self.target_index(*id), edges)
                })
                .collect()
        };
        let n_edges = formation.edges.len();
        let cap = self.cfg.link_rate * (1.0 + RATE_TOLERANCE);
        let mut load = vec![0.0; n_edges];
        let mut choice = vec![0usize; flows.len()];
        let mut best: Option<(f64, Vec<usize>)> = None;
        let suffix_peak: Vec<f64> = {
            let mut s = vec![0.0; flows.len() + 1];
            for i in (0..flows.len()).rev() {
                s[i] = s[i + 1] + self.peak[flows[i].0];
            }
            s
        };

        #[allow(clippy::too_many_arguments)]
        fn rec(
            s: &Search,
            i: usize,
            acc: f64,
            flows: &[(usize, Vec<usize>)],
            load: &mut Vec<f64>,
            choice: &mut Vec<usize>,
            suffix_peak: &[f64],
            cap: f64,
            best: &mut Option<(f64, Vec<usize>)>,
        ) {
            if let Some((b, _)) = best {
                if acc + suffix_peak[i] <= *b {
                    return;
                }
            }
            if i == flows.len() {
                *best = Some((acc, choice.clone()));
                return;
            }
            let (t, edges) = &flows[i];
            for (k, &(_, a, l)) in s.options[*t].iter().enumerate() {
                if edges.iter().all(|&e| load[e] + l <= cap) {
                    for &e in edges {
                        load[e] += l;
                    }
                    choice[i] = k;
                    rec(
                        s,
                        i + 1,
                        acc + a,
                        flows,
                        load,
                        choice,
                        suffix_peak,
                        cap,
                        best,
                    );
                    for &e in edges {
                        load[e] -= l;
                    }
                }
            }
        }
        rec(
            self,
            0,
            0.0,
            &flows,
            &mut load,
            &mut choice,
            &suffix_peak,
            cap,
            &mut best,
        );
        best
    }

    fn evaluate(&self, branches: &[&CoverageTree], key: Vec<usize>) -> Option<Found> {
        let mut formation = CoverageTree::base_only(self.cfg.edge);
        for b in branches {
            formation = formation.merge(b);
        }
        let routes = tree_routes(&formation).ok()?;
        let assignment = uav_assignment(&formation, self.cfg).ok()?;
        let (_, picks) = self.best_levels(&formation, &routes)?;
        let mut compression = CompressionAssignment::default();
        let mut level_key = Vec::with_capacity(picks.len());
        for ((id, _), &k) in routes.iter().zip(&picks) {
            let ti = self.target_index(*id);
            let (level, accuracy, _) = self.options[ti][k];
            compression.levels.insert(*id, level);
            compression
                .losses
                .insert(*id, (self.peak[ti] - accuracy).max(0.0));
            level_key.push(k);
        }
        let plan = Plan {
            formation,
            compression,
            assignment,
            routes,
        };
        let objective = objective_unchecked(&plan, self.cfg, self.p).ok()?;
        let mut key = key;
        key.extend(level_key);
        Some(Found {
            objective,
            key,
            plan,
        })
    }

    fn search_mask(&self, mask: u32) -> Option<Found> {
        let w = self.cfg.objective_weights;
        let covered = mask.count_ones() as f64;
        let peak_sum: f64 = (0..self.targets.len())
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| self.peak[i])
            .sum();
        let upper = w.accuracy * peak_sum + w.coverage * covered;
        let fleet = self.cfg.uavs.len();
        let mut best: Option<Found> = None;
        for (pi, blocks) in partitions(mask).into_iter().enumerate() {
            let lists: Vec<&Vec<CoverageTree>> =
                blocks.iter().map(|b| &self.structures[b]).collect();
            if lists.iter().any(|l| l.is_empty()) {
                continue;
            }
            let mut idx = vec![0usize; lists.len()];
            'product: loop {
                if upper < self.shared_best() - 1e-9 || self.out_of_time() {
                    return best;
                }
                let chosen: Vec<&CoverageTree> =
                    idx.iter().zip(&lists).map(|(&i, l)| &l[i]).collect();
                let uavs: usize = chosen.iter().map(|t| t.uav_count()).sum();
                if uavs <= fleet {
                    let mut key = vec![mask as usize, pi];
                    key.extend(&idx);
                    if let Some(f) = self.evaluate(&chosen, key) {
                        self.offer(f.objective);
                        if best.as_ref().is_none_or(|b| f.beats(b)) {
                            best = Some(f);
                        }
                    }
                }
                for d in (0..idx.len()).rev() {
                    idx[d] += 1;
                    if idx[d] < lists[d].len() {
                        continue 'product;
                    }
                    idx[d] = 0;
                }
                break;
            }
        }
        best
    }
}

/// Best plan over the discretized family described in the module docs.
pub fn exact_a2tpp(
    cfg: &ScenarioConfig,
    p: &QualityProfile,
    cand: &CandidateSet,
    limits: &ExactLimits,
) -> Result<ExactSolution> {
    cfg.validate()?;
    if cfg.targets.len() > limits.max_targets || cfg.uavs.len() > limits.max_uavs {
        return Err(Error::InstanceTooLarge {
            targets: cfg.targets.len(),
            uavs: cfg.uavs.len(),
            max_targets: limits.max_targets,
            max_uavs: limits.max_uavs,
        });
    }
    let targets = sorted_targets(cfg);
    let mut options = Vec::with_capacity(targets.len());
    let mut peak = Vec::with_capacity(targets.len());
    for t in &targets {
        let levels = p.pareto_levels(&t.scenario)?;
        let mut opts = Vec::with_capacity(levels.len());
        for l in levels {
            let q = p.query(&t.scenario, l)?;
            opts.push((l, q.accuracy, q.size * t.task_rate));
        }
        peak.push(p.peak_accuracy(&t.scenario)?);
        options.push(opts);
    }

    let r = cfg.min_comm_radius();
    let fleet = cfg.uavs.len();
    let masks: Vec<u32> = (1u32..(1 << targets.len())).collect();
    let built = par::map(limits.execution, &masks, |&m| {
        let ts = terminal_set(cfg, &targets, m, r);
        let mut list = vec![tst(&ts, cfg.link_rate)];
        let mut seen: BTreeSet<Vec<(i64, i64)>> = BTreeSet::new();
        seen.insert(list[0].nodes.iter().map(|n| n.position.key()).collect());
        for &c in &cand.positions {
            let t = tst_with_hubs(&ts, &[c], cfg.link_rate);
            if seen.insert(t.nodes.iter().map(|n| n.position.key()).collect()) {
                list.push(t);
            }
        }
        list.retain(|t| t.uav_count() <= fleet);
        (m, list)
    });
    let search = Search {
        cfg,
        p,
        options,
        peak,
        structures: built.into_iter().collect(),
        targets,
        deadline: Instant::now() + limits.time_budget,
        timed_out: AtomicBool::new(false),
        best_bits: AtomicU64::new(0f64.to_bits()),
    };

    // larger subsets first so their objective bounds the smaller ones
    let mut order = masks;
    order.sort_by_key(|m| (std::cmp::Reverse(m.count_ones()), *m));
    let found = par::map(limits.execution, &order, |&m| search.search_mask(m));

    let mut best = Found {
        objective: 0.0,
        key: Vec::new(),
        plan: Plan::empty(cfg),
    };
    for f in found.into_iter().flatten() {
        if f.beats(&best) {
            best = f;
        }
    }
    Ok(ExactSolution {
        objective: best.objective,
        plan: best.plan,
        optimal: !search.timed_out.load(Ordering::Relaxed),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analyzer::{fixture_profile, Quality};
    use crate::model::{ObjectiveWeights, UavSpec};
    use crate::planner::{greedy_a2tpp, GreedyParams};

    fn cfg(targets: &[(u32, f64, f64)], fleet: u32, link_rate: f64) -> ScenarioConfig {
        ScenarioConfig {
            area: [500.0, 500.0],
            edge: Point2D::new(250.0, 0.0),
            uavs: (0..fleet)
                .map(|i| UavSpec {
                    id: UavId(i),
                    start: Point2D::new(250.0, 0.0),
                    comm_radius: 16.0,
                    sense_radius: 1.0,
                    speed: 5.0,
                    energy: 1e7,
                    move_cost: 10.0,
                    hover_cost: 10.0,
                })
                .collect(),
            targets: targets
                .iter()
                .map(|&(id, x, y)| Target {
                    id: TargetId(id),
                    position: Point2D::new(x, y),
                    scenario: "Urban".into(),
                    task_rate: 10.0,
                })
                .collect(),
            deadline: 0.1,
            channel_error: 0.0,
            link_rate,
            mission_horizon: 60.0,
            objective_weights: ObjectiveWeights::default(),
        }
    }

    #[test]
    fn partitions_are_bell_numbers() {
        assert_eq!(partitions(0b1).len(), 1);
        assert_eq!(partitions(0b11).len(), 2);
        assert_eq!(partitions(0b111).len(), 5);
        assert_eq!(partitions(0b1111).len(), 15);
    }

    #[test]
    fn empty_plan_objective_is_zero() {
        let c = cfg(&[], 2, 1e6);
        let p = fixture_profile();
        assert_eq!(objective_value(&Plan::empty(&c), &c, &p).unwrap(), 0.0);
    }

    #[test]
    fn objective_substitution() {
        // one target at accuracy 0.8 with one UAV flying 10 m
        let rows = vec![
            Quality {
                accuracy: 0.8,
                size: 100.0
            };
            100
        ];
        let p = QualityProfile::from_tables([("Urban".to_string(), rows)].into_iter().collect())
            .unwrap();
        let mut c = cfg(&[(1, 250.0, 10.0)], 1, 1e6);
        c.uavs[0].start = Point2D::new(250.0, 0.0);
        let plan = greedy_a2tpp(&c, &p, &GreedyParams::default()).unwrap();
        let v = objective_value(&plan, &c, &p).unwrap();
        assert!((v - (0.8 + 1000.0 - 0.01)).abs() < 1e-9, "{v}");
        assert!((v - 1000.79).abs() < 1e-9);

        let mut scaled = c.clone();
        scaled.objective_weights = ObjectiveWeights {
            accuracy: 3.0,
            coverage: 3000.0,
            travel: 0.003,
        };
        assert!((objective_value(&plan, &scaled, &p).unwrap() - 3.0 * v).abs() < 1e-9);
    }

    #[test]
    fn long_edge_and_overload_flagged() {
        let p = fixture_profile();
        let c = cfg(&[(1, 250.0, 10.0)], 2, 1e6);
        let mut plan = greedy_a2tpp(&c, &p, &GreedyParams::default()).unwrap();
        assert!(feasibility_check(&plan, &c, &p).is_empty());
        plan.formation.nodes[1].position = Point2D::new(250.0, 16.5);
        let mut c2 = c.clone();
        c2.targets[0].position = Point2D::new(250.0, 16.5);
        assert!(feasibility_check(&plan, &c2, &p)
            .iter()
            .any(|v| matches!(v, ConstraintViolation::LinkRange { .. })));

        // force the largest payload on a link that cannot carry it
        let c3 = cfg(&[(1, 250.0, 10.0)], 2, 5e5);
        let mut plan = greedy_a2tpp(&c3, &p, &GreedyParams::default()).unwrap();
        plan.compression.levels.insert(TargetId(1), Level::BEST);
        assert!(feasibility_check(&plan, &c3, &p)
            .iter()
            .any(|v| matches!(v, ConstraintViolation::RateCap { .. })));
    }

    #[test]
    fn one_hop_gets_best_fitting_level() {
        let p = fixture_profile();
        let c = cfg(&[(1, 250.0, 10.0)], 1, 6e5);
        let sol = exact_a2tpp(
            &c,
            &p,
            &CandidateSet::target_anchored(&c).unwrap(),
            &ExactLimits::default(),
        )
        .unwrap();
        assert!(sol.optimal);
        let level = sol.plan.compression.levels[&TargetId(1)];
        let expect = p
            .max_level_within_size("Urban", 6e5 / 10.0)
            .unwrap()
            .unwrap();
        assert_eq!(
            p.query("Urban", level).unwrap().accuracy,
            p.query("Urban", expect).unwrap().accuracy
        );
        assert!(feasibility_check(&sol.plan, &c, &p).is_empty());
    }

    #[test]
    fn single_uav_picks_better_target() {
        let p = fixture_profile();
        let mut c = cfg(&[(1, 250.0, 14.0), (2, 250.0, 8.0)], 1, 1e7);
        c.targets[0].scenario = "Pets".into();
        let sol = exact_a2tpp(
            &c,
            &p,
            &CandidateSet::target_anchored(&c).unwrap(),
            &ExactLimits::default(),
        )
        .unwrap();
        // brute force over the two singletons
        let gain = |t: &Target| {
            p.peak_accuracy(&t.scenario).unwrap() + 1000.0 - 0.001 * distance(c.edge, t.position)
        };
        let want = if gain(&c.targets[0]) >= gain(&c.targets[1]) {
            1
        } else {
            2
        };
        assert_eq!(
            sol.plan.formation.covered_targets().collect::<Vec<_>>(),
            vec![TargetId(want)]
        );
    }

    #[test]
    fn too_large_rejected() {
        let p = fixture_profile();
        let c = cfg(
            &[
                (1, 250.0, 10.0),
                (2, 240.0, 10.0),
                (3, 230.0, 10.0),
                (4, 220.0, 10.0),
            ],
            2,
            1e6,
        );
        assert!(matches!(
            exact_a2tpp(
                &c,
                &p,
                &CandidateSet::target_anchored(&c).unwrap(),
                &ExactLimits::default()
            ),
            Err(Error::InstanceTooLarge { .. })
        ));
    }

    #[test]
    fn candidate_sets() {
        let c = cfg(&[(1, 250.0, 40.0), (2, 230.0, 30.0)], 4, 1e6);
        assert_eq!(
            CandidateSet::target_anchored(&c).unwrap().positions.len(),
            2
        );
        let g = CandidateSet::grid(&c, 100.0).unwrap();
        assert_eq!(g.positions.len(), 36);
        assert!(CandidateSet::tst_nodes(&c).unwrap().positions.len() >= 1);
        assert!(CandidateSet::new(vec![], Derivation::Custom, &c).is_err());
        assert!(CandidateSet::new(vec![Point2D::new(-5.0, 0.0)], Derivation::Custom, &c).is_err());
    }
}
