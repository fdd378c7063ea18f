//! Per-target compression under shared link capacity.
//!
//! Loads are in bytes per second: a target sending payloads of `size` bytes
//! at `task_rate` tasks per second puts `size * task_rate` on every link of
//! its route.

use std::collections::{BTreeMap, VecDeque};

use crate::analyzer::{Level, QualityProfile};
use crate::error::{Error, Result};
use crate::model::{ScenarioConfig, Target, TargetId};
use crate::plan::{tree_routes, CompressionAssignment};
use crate::tree::{CoverageTree, EdgeKey, NodeId};

/// The unique tree path between two nodes, `from` first.
pub fn shortest_path(t: &CoverageTree, from: NodeId, to: NodeId) -> Result<Vec<NodeId>> {
    let n = t.nodes.len();
    for x in [from, to] {
        if x.0 >= n {
            return Err(Error::DisconnectedNode(x));
        }
    }
    let adj = t.neighbors();
    let mut prev: Vec<Option<NodeId>> = vec![None; n];
    let mut seen = vec![false; n];
    seen[from.0] = true;
    let mut queue = VecDeque::from([from]);
    while let Some(v) = queue.pop_front() {
        if v == to {
            break;
        }
        for &w in &adj[v.0] {
            if !seen[w.0] {
                seen[w.0] = true;
                prev[w.0] = Some(v);
                queue.push_back(w);
            }
        }
    }
    if !seen[to.0] {
        return Err(Error::DisconnectedNode(to));
    }
    let mut path = vec![to];
    let mut cur = to;
    while let Some(p) = prev[cur.0] {
        path.push(p);
        cur = p;
    }
    path.reverse();
    Ok(path)
}

pub fn path_edges(path: &[NodeId]) -> impl Iterator<Item = EdgeKey> + '_ {
    path.windows(2).map(|w| EdgeKey::new(w[0], w[1]))
}

/// Number of listed flows crossing each edge.
pub fn sharing_counts<'a>(
    routes: impl IntoIterator<Item = &'a Vec<NodeId>>,
) -> BTreeMap<EdgeKey, usize> {
    let mut out = BTreeMap::new();
    for r in routes {
        for e in path_edges(r) {
            *out.entry(e).or_insert(0) += 1;
        }
    }
    out
}

fn capacities(t: &CoverageTree) -> BTreeMap<EdgeKey, f64> {
    t.edges.iter().map(|e| (e.key(), e.capacity)).collect()
}

fn bottleneck_in(
    capacity: &BTreeMap<EdgeKey, f64>,
    path: &[NodeId],
    sharing: &BTreeMap<EdgeKey, usize>,
) -> f64 {
    path_edges(path)
        .map(|e| {
            let w = capacity.get(&e).copied().unwrap_or(0.0).max(0.0);
            w / sharing.get(&e).copied().unwrap_or(1).max(1) as f64
        })
        .fold(f64::INFINITY, f64::min)
}

/// Smallest per-flow share along `path`, using the edge weights of `t` as
/// the residual capacity. A single-node path is unconstrained.
pub fn bottleneck(t: &CoverageTree, path: &[NodeId], sharing: &BTreeMap<EdgeKey, usize>) -> f64 {
    bottleneck_in(&capacities(t), path, sharing)
}

fn target_of(cfg: &ScenarioConfig, t: TargetId) -> Result<&Target> {
    cfg.target(t).ok_or(Error::UnknownTarget(t))
}

/// Bytes per second a target offers at `level`.
pub fn flow_load(
    cfg: &ScenarioConfig,
    p: &QualityProfile,
    t: TargetId,
    level: Level,
) -> Result<f64> {
    let tg = target_of(cfg, t)?;
    Ok(p.query(&tg.scenario, level)?.size * tg.task_rate)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Allocation {
    pub compression: CompressionAssignment,
    /// load reserved on each edge by non-saturated targets
    pub consumed: BTreeMap<EdgeKey, f64>,
    pub capacity: BTreeMap<EdgeKey, f64>,
}

/// Sequential bottleneck allocation over the covered targets of `t`,
/// returning the levels together with the per-edge bookkeeping.
pub fn allocate(t: &CoverageTree, cfg: &ScenarioConfig, p: &QualityProfile) -> Result<Allocation> {
    let routes = tree_routes(t)?;
    let mut order = Vec::with_capacity(routes.len());
    for &id in routes.keys() {
        let tg = target_of(cfg, id)?;
        let full = p.best(&tg.scenario)?.size * tg.task_rate;
        order.push((full, id));
    }
    order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    let capacity = capacities(t);
    let mut residual = capacity.clone();
    let mut consumed: BTreeMap<EdgeKey, f64> = capacity.keys().map(|&k| (k, 0.0)).collect();
    let mut sharing = sharing_counts(routes.values());
    let mut out = CompressionAssignment::default();

    for (full, id) in order {
        let tg = target_of(cfg, id)?;
        let path = &routes[&id];
        let b = bottleneck_in(&residual, path, &sharing);
        let budget = b.min(full) / tg.task_rate;
        let level = match p.max_level_within_size(&tg.scenario, budget)? {
            Some(l) => {
                let load = p.query(&tg.scenario, l)?.size * tg.task_rate;
                for e in path_edges(path) {
                    *residual.get_mut(&e).expect("route edge") -= load;
                    *consumed.get_mut(&e).expect("route edge") += load;
                }
                l
            }
            None => {
                out.saturated.insert(id);
                Level::LOWEST
            }
        };
        let loss = p.peak_accuracy(&tg.scenario)? - p.query(&tg.scenario, level)?.accuracy;
        out.levels.insert(id, level);
        out.losses.insert(id, loss.max(0.0));
        for e in path_edges(path) {
            *sharing.get_mut(&e).expect("route edge") -= 1;
        }
    }
    Ok(Allocation {
        compression: out,
        consumed,
        capacity,
    })
}

pub fn compression_assignment(
    t: &CoverageTree,
    cfg: &ScenarioConfig,
    p: &QualityProfile,
) -> Result<CompressionAssignment> {
    Ok(allocate(t, cfg, p)?.compression)
}

/// Per-edge load when every covered target sends at its assigned level,
/// saturated ones included.
pub fn offered_load(
    t: &CoverageTree,
    routes: &BTreeMap<TargetId, Vec<NodeId>>,
    c: &CompressionAssignment,
    cfg: &ScenarioConfig,
    p: &QualityProfile,
) -> Result<BTreeMap<EdgeKey, f64>> {
    let mut out: BTreeMap<EdgeKey, f64> = t.edges.iter().map(|e| (e.key(), 0.0)).collect();
    for (id, path) in routes {
        let level = c.levels.get(id).copied().unwrap_or(Level::BEST);
        let load = flow_load(cfg, p, *id, level)?;
        for e in path_edges(path) {
            *out.entry(e).or_insert(0.0) += load;
        }
    }
    Ok(out)
}
