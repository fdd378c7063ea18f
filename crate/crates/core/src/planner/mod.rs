//! Greedy joint planner: grows coverage trees target by target, scoring each
//! candidate by accuracy loss under the bandwidth it would get and by the
//! share of the remaining fleet it consumes.

mod assignment;
mod bandwidth;

use std::collections::{BTreeMap, BTreeSet};

pub use assignment::{hungarian, uav_assignment};
pub use bandwidth::{
    allocate, bottleneck, compression_assignment, flow_load, offered_load, path_edges,
    sharing_counts, shortest_path, Allocation,
};

use crate::analyzer::QualityProfile;
use crate::error::{Error, Result};
use crate::model::{ScenarioConfig, TargetId};
use crate::par::{self, Execution};
use crate::plan::{tree_routes, CompressionAssignment, Plan};
use crate::steiner::{los_tree, tst, TerminalSet};
use crate::tree::{CoverageTree, EdgeKey, NodeId};

/// Share of each radio's airtime the planner is willing to fill; the rest
/// absorbs queueing and retransmissions.
pub const DEFAULT_USABLE_LINK_FRACTION: f64 = 0.75;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreedyParams {
    /// weight of accuracy loss against fleet consumption
    pub alpha: f64,
    /// see [`estimate_capacities`]
    pub usable_link_fraction: f64,
    pub execution: Execution,
}

impl Default for GreedyParams {
    fn default() -> Self {
        Self {
            alpha: 0.5,
            usable_link_fraction: DEFAULT_USABLE_LINK_FRACTION,
            execution: Execution::default(),
        }
    }
}

impl GreedyParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::InvalidParameter(format!(
                "alpha {} outside [0, 1]",
                self.alpha
            )));
        }
        if !(self.usable_link_fraction > 0.0 && self.usable_link_fraction <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "usable_link_fraction {} outside (0, 1]",
                self.usable_link_fraction
            )));
        }
        Ok(())
    }
}

/// Sets every edge weight to the bandwidth the link can sustain when each
/// UAV splits `fraction` of its single half-duplex radio over its links in
/// proportion to the flows each link carries. A flow relayed by a UAV uses
/// its radio twice, once to receive and once to send. The edge server has
/// no such limit, so only the UAV end counts on its links. Links that carry
/// no flow get an even share.
pub fn estimate_capacities(t: &mut CoverageTree, link_rate: f64, fraction: f64) {
    let n = t.nodes.len();
    let mut flows: BTreeMap<EdgeKey, usize> = BTreeMap::new();
    if let Ok(routes) = tree_routes(t) {
        for path in routes.values() {
            for e in path_edges(path) {
                *flows.entry(e).or_insert(0) += 1;
            }
        }
    }
    let mut airtime = vec![0usize; n];
    let mut degree = vec![0usize; n];
    for e in &t.edges {
        let k = flows.get(&e.key()).copied().unwrap_or(0);
        for v in [e.a, e.b] {
            airtime[v.0] += k;
            degree[v.0] += 1;
        }
    }
    let share = |v: NodeId, k: usize| -> f64 {
        if v == CoverageTree::BASE {
            1.0
        } else if k == 0 || airtime[v.0] == 0 {
            1.0 / degree[v.0].max(1) as f64
        } else {
            k as f64 / airtime[v.0] as f64
        }
    };
    for e in &mut t.edges {
        let k = flows.get(&e.key()).copied().unwrap_or(0);
        e.capacity = fraction * link_rate * share(e.a, k).min(share(e.b, k));
    }
}

/// Greedy loop state between iterations.
#[derive(Debug, Clone, PartialEq)]
pub struct GreedyState {
    pub covered: BTreeSet<TargetId>,
    pub archived: CoverageTree,
    pub partial: CoverageTree,
    pub partial_cost: f64,
}

impl GreedyState {
    fn new(cfg: &ScenarioConfig) -> Self {
        Self {
            covered: BTreeSet::new(),
            archived: CoverageTree::base_only(cfg.edge),
            partial: CoverageTree::base_only(cfg.edge),
            partial_cost: 0.0,
        }
    }

    pub fn used(&self) -> usize {
        self.archived.uav_count() + self.partial.uav_count()
    }

    fn archive_partial(&mut self) {
        self.archived = self.archived.merge(&self.partial);
        self.partial = CoverageTree::base_only(self.archived.base_position());
        self.partial_cost = 0.0;
    }
}

/// Candidate score: `alpha` times the mean accuracy loss over the targets
/// `t_new` covers, plus `1 - alpha` times the new UAVs it needs (beyond the
/// one that would be added anyway) over the UAVs still free.
pub fn cost_alpha(
    t_new: &CoverageTree,
    t_prev: &CoverageTree,
    archived: &CoverageTree,
    ca: &CompressionAssignment,
    fleet: usize,
    alpha: f64,
) -> Result<f64> {
    if t_new.covered.is_empty() {
        return Err(Error::EmptyCoverage);
    }
    let losses: f64 = t_new
        .covered_targets()
        .map(|t| ca.losses.get(&t).copied().unwrap_or(0.0))
        .sum();
    let avg_loss = losses / t_new.covered.len() as f64;

    let prev = t_prev.position_keys();
    let fresh = t_new
        .nodes
        .iter()
        .filter(|n| !prev.contains(&n.position.key()))
        .count();
    let remaining = fleet as f64 - (archived.uav_count() + t_prev.uav_count()) as f64;
    let uav_term = if remaining > 0.0 {
        fresh.saturating_sub(1) as f64 / remaining
    } else {
        1.0
    };
    Ok(alpha * avg_loss + (1.0 - alpha) * uav_term)
}

struct Candidate {
    target: TargetId,
    tree: CoverageTree,
    cost: f64,
}

fn check_inputs(cfg: &ScenarioConfig, p: &QualityProfile, params: &GreedyParams) -> Result<()> {
    cfg.validate()?;
    params.validate()?;
    if cfg.uavs.is_empty() {
        return Err(Error::InvalidScenario("no UAVs".into()));
    }
    for t in &cfg.targets {
        if !p.has_scenario(&t.scenario) {
            return Err(Error::UnknownScenario(t.scenario.clone()));
        }
    }
    Ok(())
}

/// Runs the greedy growth loop and returns the final formation.
pub fn greedy_formation(
    cfg: &ScenarioConfig,
    p: &QualityProfile,
    params: &GreedyParams,
) -> Result<CoverageTree> {
    check_inputs(cfg, p, params)?;
    let fleet = cfg.uavs.len();
    let r = cfg.min_comm_radius();
    // retransmissions eat a share ψ of every radio's airtime on average
    let goodput = cfg.link_rate * (1.0 - cfg.channel_error);
    let budget = |mut t: CoverageTree| {
        estimate_capacities(&mut t, goodput, params.usable_link_fraction);
        t
    };
    let mut state = GreedyState::new(cfg);

    while state.covered.len() < cfg.targets.len() && state.used() < fleet {
        let uncovered: Vec<_> = cfg
            .targets
            .iter()
            .filter(|t| !state.covered.contains(&t.id))
            .collect();
        let scored = par::map(
            params.execution,
            &uncovered,
            |t| -> Result<Option<Candidate>> {
                let mut terminals = vec![(t.id, t.position)];
                for &n in state.partial.covered.keys() {
                    terminals.push((state.partial.covered[&n], state.partial.position(n)));
                }
                let tree = budget(tst(
                    &TerminalSet {
                        base: cfg.edge,
                        terminals,
                        comm_radius: r,
                    },
                    cfg.link_rate,
                ));
                if tree.uav_count() + state.archived.uav_count() > fleet {
                    return Ok(None);
                }
                let ca = compression_assignment(&tree, cfg, p)?;
                let cost = cost_alpha(
                    &tree,
                    &state.partial,
                    &state.archived,
                    &ca,
                    fleet,
                    params.alpha,
                )?;
                Ok(Some(Candidate {
                    target: t.id,
                    tree,
                    cost,
                }))
            },
        );
        let mut best: Option<Candidate> = None;
        for c in scored {
            let Some(c) = c? else { continue };
            let better = match &best {
                None => true,
                Some(b) => c.cost < b.cost || (c.cost == b.cost && c.target < b.target),
            };
            if better {
                best = Some(c);
            }
        }
        let Some(best) = best else {
            break;
        };

        let target = cfg.target(best.target).expect("candidate target");
        let los = budget(los_tree(
            cfg.edge,
            (target.id, target.position),
            r,
            cfg.link_rate,
        ));
        let mut take_los = false;
        let mut los_cost = f64::INFINITY;
        if los.uav_count() + state.used() <= fleet {
            let with_partial = state.archived.merge(&state.partial);
            let ca = compression_assignment(&los, cfg, p)?;
            let base = CoverageTree::base_only(cfg.edge);
            los_cost = cost_alpha(&los, &base, &with_partial, &ca, fleet, params.alpha)?;
            take_los = los_cost < best.cost - state.partial_cost;
        }
        if take_los {
            state.archive_partial();
            state.partial = los;
            state.partial_cost = los_cost;
        } else {
            state.partial = best.tree;
            state.partial_cost = best.cost;
        }
        state.covered.insert(best.target);
    }
    state.archive_partial();
    Ok(state.archived)
}

/// Compression, routes and UAV matching for a finished formation.
pub fn complete_plan(
    formation: CoverageTree,
    cfg: &ScenarioConfig,
    p: &QualityProfile,
) -> Result<Plan> {
    let compression = compression_assignment(&formation, cfg, p)?;
    let routes = tree_routes(&formation)?;
    let assignment = uav_assignment(&formation, cfg)?;
    Ok(Plan {
        formation,
        compression,
        assignment,
        routes,
    })
}

pub fn greedy_a2tpp(
    cfg: &ScenarioConfig,
    p: &QualityProfile,
    params: &GreedyParams,
) -> Result<Plan> {
    let formation = greedy_formation(cfg, p, params)?;
    complete_plan(formation, cfg, p)
}
