//! Coverage-only baseline: one Steiner tree over as many targets as the
//! fleet allows, flown with a fixed compression level.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::analyzer::{Level, QualityProfile};
use crate::error::Result;
use crate::geometry::distance;
use crate::model::ScenarioConfig;
use crate::plan::{tree_routes, CompressionAssignment, Plan};
use crate::planner::uav_assignment;
use crate::steiner::{tst, TerminalSet};
use crate::tree::CoverageTree;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum StbaVariant {
    /// level 1
    H,
    /// level 50
    M,
    /// level 100
    L,
}

impl StbaVariant {
    pub const ALL: [StbaVariant; 3] = [StbaVariant::H, StbaVariant::M, StbaVariant::L];

    pub fn level(self) -> Level {
        match self {
            StbaVariant::H => Level::BEST,
            StbaVariant::M => Level::MEDIUM,
            StbaVariant::L => Level::LOWEST,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            StbaVariant::H => "stba-h",
            StbaVariant::M => "stba-m",
            StbaVariant::L => "stba-l",
        }
    }
}

/// Tree over the targets, dropping the one farthest from the edge server
/// (ties: highest id) until the formation fits the fleet.
pub fn stba(cfg: &ScenarioConfig) -> CoverageTree {
    let mut kept: Vec<_> = cfg.targets.iter().collect();
    kept.sort_by(|a, b| {
        distance(a.position, cfg.edge)
            .total_cmp(&distance(b.position, cfg.edge))
            .then(a.id.cmp(&b.id))
    });
    let r = cfg.min_comm_radius();
    while !kept.is_empty() {
        let tree = tst(
            &TerminalSet {
                base: cfg.edge,
                terminals: kept.iter().map(|t| (t.id, t.position)).collect(),
                comm_radius: r,
            },
            cfg.link_rate,
        );
        if tree.uav_count() <= cfg.uavs.len() {
            return tree;
        }
        kept.pop();
    }
    CoverageTree::base_only(cfg.edge)
}

/// Fixed-level plan over `tree`.
pub fn stba_variant(
    tree: &CoverageTree,
    variant: StbaVariant,
    cfg: &ScenarioConfig,
    p: &QualityProfile,
) -> Result<Plan> {
    let level = variant.level();
    let mut compression = CompressionAssignment::default();
    for t in tree.covered_targets() {
        let tg = cfg.target(t).ok_or(crate::error::Error::UnknownTarget(t))?;
        let loss = p.peak_accuracy(&tg.scenario)? - p.query(&tg.scenario, level)?.accuracy;
        compression.levels.insert(t, level);
        compression.losses.insert(t, loss.max(0.0));
    }
    Ok(Plan {
        formation: tree.clone(),
        compression,
        assignment: uav_assignment(tree, cfg)?,
        routes: tree_routes(tree)?,
    })
}

/// All three variants over the same tree, keyed by label.
pub fn stba_plans(cfg: &ScenarioConfig, p: &QualityProfile) -> Result<BTreeMap<StbaVariant, Plan>> {
    let tree = stba(cfg);
    StbaVariant::ALL
        .iter()
        .map(|&v| Ok((v, stba_variant(&tree, v, cfg, p)?)))
        .collect()
}
