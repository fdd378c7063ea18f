//! A complete plan: formation, per-target compression, which UAV flies to
//! which node, and the route each target's tasks take to the edge server.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::analyzer::Level;
use crate::error::{Error, Result};
use crate::geometry::distance;
use crate::model::{energy_feasible, ScenarioConfig, TargetId, UavId};
use crate::tree::{validate_tree, CoverageTree, NodeId, TreeViolation};

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CompressionAssignment {
    pub levels: BTreeMap<TargetId, Level>,
    /// accuracy given up relative to the scenario's best level
    pub losses: BTreeMap<TargetId, f64>,
    /// targets for which no level fit the available bandwidth; they are
    /// sent at the lowest quality and do not reserve capacity
    pub saturated: BTreeSet<TargetId>,
}

impl CompressionAssignment {
    pub fn average_loss(&self) -> Option<f64> {
        if self.losses.is_empty() {
            None
        } else {
            Some(self.losses.values().sum::<f64>() / self.losses.len() as f64)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Plan {
    pub formation: CoverageTree,
    pub compression: CompressionAssignment,
    pub assignment: BTreeMap<UavId, NodeId>,
    /// inspector first, base last
    pub routes: BTreeMap<TargetId, Vec<NodeId>>,
}

impl Plan {
    /// The plan that flies nothing.
    pub fn empty(cfg: &ScenarioConfig) -> Self {
        Plan {
            formation: CoverageTree::base_only(cfg.edge),
            compression: CompressionAssignment::default(),
            assignment: BTreeMap::new(),
            routes: BTreeMap::new(),
        }
    }

    pub fn covered_count(&self) -> usize {
        self.formation.covered.len()
    }

    pub fn uav_count(&self) -> usize {
        self.assignment.len()
    }

    /// Total straight-line distance flown from the UAVs' start positions.
    pub fn travel_distance(&self, cfg: &ScenarioConfig) -> f64 {
        self.assignment
            .iter()
            .filter_map(|(u, n)| {
                let spec = cfg.uav(*u)?;
                let node = self.formation.nodes.get(n.0)?;
                Some(distance(spec.start, node.position))
            })
            .sum()
    }
}

/// Path from every inspector to the base, following tree parents.
pub fn tree_routes(tree: &CoverageTree) -> Result<BTreeMap<TargetId, Vec<NodeId>>> {
    let parents = tree.parents();
    let mut out = BTreeMap::new();
    for (&node, &target) in &tree.covered {
        let mut path = vec![node];
        let mut cur = node;
        while cur != CoverageTree::BASE {
            cur = parents
                .get(cur.0)
                .copied()
                .flatten()
                .ok_or(Error::DisconnectedNode(node))?;
            path.push(cur);
        }
        out.insert(target, path);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub enum PlanViolation {
    Tree(TreeViolation),
    UnknownUav(UavId),
    AssignedToBase(UavId),
    UnknownNode { uav: UavId, node: NodeId },
    NodeSharedBy { node: NodeId, uavs: Vec<UavId> },
    NodeUnassigned(NodeId),
    EnergyInfeasible { uav: UavId, node: NodeId },
    MissingLevel(TargetId),
    StrayLevel(TargetId),
    BadLoss { target: TargetId, loss: f64 },
    MissingRoute(TargetId),
    WrongRoute(TargetId),
    StrayRoute(TargetId),
}

/// Every structural or energy problem with `plan`; empty when the plan is
/// well formed. Bandwidth is not checked here.
pub fn validate_plan(plan: &Plan, cfg: &ScenarioConfig) -> Vec<PlanViolation> {
    let tree = &plan.formation;
    let mut out: Vec<PlanViolation> = validate_tree(tree, cfg)
        .into_iter()
        .map(PlanViolation::Tree)
        .collect();

    let mut holders: BTreeMap<NodeId, Vec<UavId>> = BTreeMap::new();
    for (&u, &n) in &plan.assignment {
        let Some(spec) = cfg.uav(u) else {
            out.push(PlanViolation::UnknownUav(u));
            continue;
        };
        if n == CoverageTree::BASE {
            out.push(PlanViolation::AssignedToBase(u));
            continue;
        }
        if n.0 >= tree.nodes.len() {
            out.push(PlanViolation::UnknownNode { uav: u, node: n });
            continue;
        }
        if !energy_feasible(spec, tree.position(n), cfg.edge, cfg.mission_horizon) {
            out.push(PlanViolation::EnergyInfeasible { uav: u, node: n });
        }
        holders.entry(n).or_default().push(u);
    }
    for (n, uavs) in &holders {
        if uavs.len() > 1 {
            out.push(PlanViolation::NodeSharedBy {
                node: *n,
                uavs: uavs.clone(),
            });
        }
    }
    for i in 1..tree.nodes.len() {
        if !holders.contains_key(&NodeId(i)) {
            out.push(PlanViolation::NodeUnassigned(NodeId(i)));
        }
    }

    let covered: BTreeSet<TargetId> = tree.covered_targets().collect();
    let c = &plan.compression;
    for t in &covered {
        if !c.levels.contains_key(t) {
            out.push(PlanViolation::MissingLevel(*t));
        }
    }
    for t in c.levels.keys() {
        if !covered.contains(t) {
            out.push(PlanViolation::StrayLevel(*t));
        }
    }
    for (&t, &loss) in &c.losses {
        if !(0.0..=1.0).contains(&loss) {
            out.push(PlanViolation::BadLoss { target: t, loss });
        }
    }

    let expected = tree_routes(tree).unwrap_or_default();
    for t in &covered {
        match (plan.routes.get(t), expected.get(t)) {
            (None, _) => out.push(PlanViolation::MissingRoute(*t)),
            (Some(r), Some(e)) if r == e => {}
            (Some(_), _) => out.push(PlanViolation::WrongRoute(*t)),
        }
    }
    for t in plan.routes.keys() {
        if !covered.contains(t) {
            out.push(PlanViolation::StrayRoute(*t));
        }
    }
    out
}
