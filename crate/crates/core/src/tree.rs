//! Connected coverage formations: a tree of UAV positions rooted at the edge
//! server, where inspector nodes hover over targets and relays forward data.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::geometry::{distance, Point2D};
use crate::model::{ScenarioConfig, TargetId};

/// Edge-length slack absorbing floating-point construction error.
pub const LENGTH_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub usize);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Base,
    Relay,
    Inspector,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeNode {
    pub id: NodeId,
    pub position: Point2D,
    pub role: Role,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub a: NodeId,
    pub b: NodeId,
    /// bytes / second
    pub capacity: f64,
}

impl Edge {
    pub fn key(&self) -> EdgeKey {
        EdgeKey::new(self.a, self.b)
    }
}

/// Undirected edge identity, endpoints in ascending order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeKey(pub NodeId, pub NodeId);

impl EdgeKey {
    pub fn new(a: NodeId, b: NodeId) -> Self {
        if a <= b {
            EdgeKey(a, b)
        } else {
            EdgeKey(b, a)
        }
    }
}

/// Node ids are indices into `nodes`; node 0 is the base.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageTree {
    pub nodes: Vec<TreeNode>,
    pub edges: Vec<Edge>,
    /// inspector node -> covered target
    pub covered: BTreeMap<NodeId, TargetId>,
}

impl CoverageTree {
    pub const BASE: NodeId = NodeId(0);

    /// The formation containing only the edge server.
    pub fn base_only(edge: Point2D) -> Self {
        CoverageTree {
            nodes: vec![TreeNode {
                id: Self::BASE,
                position: edge,
                role: Role::Base,
            }],
            edges: Vec::new(),
            covered: BTreeMap::new(),
        }
    }

    pub fn add_node(&mut self, position: Point2D, role: Role) -> NodeId {
        let id = NodeId(self.nodes.len());
        self.nodes.push(TreeNode { id, position, role });
        id
    }

    pub fn add_edge(&mut self, a: NodeId, b: NodeId, capacity: f64) {
        self.edges.push(Edge { a, b, capacity });
    }

    pub fn base_position(&self) -> Point2D {
        self.nodes[0].position
    }

    pub fn position(&self, n: NodeId) -> Point2D {
        self.nodes[n.0].position
    }

    /// UAVs needed to fly this formation.
    pub fn uav_count(&self) -> usize {
        self.nodes.len().saturating_sub(1)
    }

    pub fn covered_targets(&self) -> impl Iterator<Item = TargetId> + '_ {
        self.covered.values().copied()
    }

    pub fn inspector_of(&self, t: TargetId) -> Option<NodeId> {
        self.covered
            .iter()
            .find_map(|(&n, &tt)| (tt == t).then_some(n))
    }

    pub fn neighbors(&self) -> Vec<Vec<NodeId>> {
        let mut adj = vec![Vec::new(); self.nodes.len()];
        for e in &self.edges {
            if e.a.0 < adj.len() && e.b.0 < adj.len() {
                adj[e.a.0].push(e.b);
                adj[e.b.0].push(e.a);
            }
        }
        for list in &mut adj {
            list.sort();
        }
        adj
    }

    /// Parent of every node when the tree is rooted at the base; `None` for
    /// the base and for nodes not reachable from it.
    pub fn parents(&self) -> Vec<Option<NodeId>> {
        let adj = self.neighbors();
        let mut parent = vec![None; self.nodes.len()];
        let mut seen = vec![false; self.nodes.len()];
        let mut queue = VecDeque::new();
        if !self.nodes.is_empty() {
            seen[0] = true;
            queue.push_back(Self::BASE);
        }
        while let Some(n) = queue.pop_front() {
            for &m in &adj[n.0] {
                if !seen[m.0] {
                    seen[m.0] = true;
                    parent[m.0] = Some(n);
                    queue.push_back(m);
                }
            }
        }
        parent
    }

    pub fn edge_capacity(&self, key: EdgeKey) -> Option<f64> {
        self.edges
            .iter()
            .find(|e| e.key() == key)
            .map(|e| e.capacity)
    }

    /// Union of two formations sharing only the base node. Node ids of
    /// `other` are shifted past ours.
    pub fn merge(&self, other: &CoverageTree) -> CoverageTree {
        let mut out = self.clone();
        let offset = out.nodes.len() - 1;
        let remap = |n: NodeId| {
            if n == Self::BASE {
                Self::BASE
            } else {
                NodeId(n.0 + offset)
            }
        };
        for node in other.nodes.iter().skip(1) {
            out.nodes.push(TreeNode {
                id: remap(node.id),
                position: node.position,
                role: node.role,
            });
        }
        for e in &other.edges {
            out.edges.push(Edge {
                a: remap(e.a),
                b: remap(e.b),
                capacity: e.capacity,
            });
        }
        for (&n, &t) in &other.covered {
            out.covered.insert(remap(n), t);
        }
        out
    }

    /// Position identities of all nodes, base included.
    pub fn position_keys(&self) -> BTreeSet<(i64, i64)> {
        self.nodes.iter().map(|n| n.position.key()).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TreeViolation {
    MissingBase,
    ExtraBase(NodeId),
    BaseMisplaced {
        at: Point2D,
        expected: Point2D,
    },
    BadNodeId(NodeId),
    DanglingEdge {
        a: NodeId,
        b: NodeId,
    },
    NotATree {
        nodes: usize,
        edges: usize,
    },
    Disconnected(NodeId),
    EdgeTooLong {
        a: NodeId,
        b: NodeId,
        length: f64,
        limit: f64,
    },
    OutsideArea(NodeId),
    NotAnInspector(NodeId),
    UnknownTarget {
        node: NodeId,
        target: TargetId,
    },
    InspectorOutOfRange {
        node: NodeId,
        target: TargetId,
        distance: f64,
    },
    DuplicateCoverage(TargetId),
    FleetExceeded {
        needed: usize,
        fleet: usize,
    },
}

/// Every way `t` breaks the formation invariants under `cfg`; empty when
/// the formation is valid.
pub fn validate_tree(t: &CoverageTree, cfg: &ScenarioConfig) -> Vec<TreeViolation> {
    let mut out = Vec::new();
    let n = t.nodes.len();
    if n == 0 {
        out.push(TreeViolation::MissingBase);
        return out;
    }
    for (i, node) in t.nodes.iter().enumerate() {
        if node.id.0 != i {
            out.push(TreeViolation::BadNodeId(node.id));
        }
        if i == 0 {
            if node.role != Role::Base {
                out.push(TreeViolation::MissingBase);
            }
        } else if node.role == Role::Base {
            out.push(TreeViolation::ExtraBase(node.id));
        }
        if !cfg.contains(node.position) {
            out.push(TreeViolation::OutsideArea(node.id));
        }
    }
    let base = t.base_position();
    if distance(base, cfg.edge) > LENGTH_TOLERANCE {
        out.push(TreeViolation::BaseMisplaced {
            at: base,
            expected: cfg.edge,
        });
    }

    let limit = cfg.min_comm_radius();
    let mut structural_ok = true;
    for e in &t.edges {
        if e.a.0 >= n || e.b.0 >= n || e.a == e.b {
            out.push(TreeViolation::DanglingEdge { a: e.a, b: e.b });
            structural_ok = false;
            continue;
        }
        let length = distance(t.position(e.a), t.position(e.b));
        if length > limit + LENGTH_TOLERANCE {
            out.push(TreeViolation::EdgeTooLong {
                a: e.a,
                b: e.b,
                length,
                limit,
            });
        }
    }
    if t.edges.len() + 1 != n {
        out.push(TreeViolation::NotATree {
            nodes: n,
            edges: t.edges.len(),
        });
    }
    if structural_ok {
        let parents = t.parents();
        for i in 1..n {
            if parents[i].is_none() {
                out.push(TreeViolation::Disconnected(NodeId(i)));
            }
        }
    }

    let sense = cfg.min_sense_radius();
    let mut seen_targets = BTreeSet::new();
    for (&node, &target) in &t.covered {
        if node.0 >= n || t.nodes[node.0].role != Role::Inspector {
            out.push(TreeViolation::NotAnInspector(node));
            continue;
        }
        if !seen_targets.insert(target) {
            out.push(TreeViolation::DuplicateCoverage(target));
        }
        match cfg.target(target) {
            None => out.push(TreeViolation::UnknownTarget { node, target }),
            Some(tg) => {
                let d = distance(t.position(node), tg.position);
                if d > sense + LENGTH_TOLERANCE {
                    out.push(TreeViolation::InspectorOutOfRange {
                        node,
                        target,
                        distance: d,
                    });
                }
            }
        }
    }
    for node in &t.nodes {
        if node.role == Role::Inspector && !t.covered.contains_key(&node.id) {
            out.push(TreeViolation::NotAnInspector(node.id));
        }
    }
    if t.uav_count() > cfg.uavs.len() {
        out.push(TreeViolation::FleetExceeded {
            needed: t.uav_count(),
            fleet: cfg.uavs.len(),
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ObjectiveWeights, Target, UavId, UavSpec};

    fn cfg(targets: Vec<(u32, f64, f64)>) -> ScenarioConfig {
        ScenarioConfig {
            area: [100.0, 100.0],
            edge: Point2D::new(50.0, 0.0),
            uavs: (0..4)
                .map(|i| UavSpec {
                    id: UavId(i),
                    start: Point2D::new(50.0, 0.0),
                    comm_radius: 16.0,
                    sense_radius: 1.0,
                    speed: 5.0,
                    energy: 1e9,
                    move_cost: 1.0,
                    hover_cost: 1.0,
                })
                .collect(),
            targets: targets
                .into_iter()
                .map(|(id, x, y)| Target {
                    id: TargetId(id),
                    position: Point2D::new(x, y),
                    scenario: "Urban".into(),
                    task_rate: 1.0,
                })
                .collect(),
            deadline: 0.1,
            channel_error: 0.0,
            link_rate: 1e6,
            mission_horizon: 10.0,
            objective_weights: ObjectiveWeights::default(),
        }
    }

    #[test]
    fn base_only_is_valid() {
        let c = cfg(vec![]);
        assert!(validate_tree(&CoverageTree::base_only(c.edge), &c).is_empty());
    }

    #[test]
    fn edge_just_too_long() {
        let c = cfg(vec![(1, 50.0, 16.1)]);
        let mut t = CoverageTree::base_only(c.edge);
        let i = t.add_node(Point2D::new(50.0, 16.1), Role::Inspector);
        t.add_edge(CoverageTree::BASE, i, 1e6);
        t.covered.insert(i, TargetId(1));
        let v = validate_tree(&t, &c);
        assert_eq!(v.len(), 1);
        assert!(matches!(v[0], TreeViolation::EdgeTooLong { .. }));
    }

    #[test]
    fn duplicate_coverage_reported() {
        let c = cfg(vec![(1, 50.0, 10.0)]);
        let mut t = CoverageTree::base_only(c.edge);
        let a = t.add_node(Point2D::new(50.0, 10.0), Role::Inspector);
        let b = t.add_node(Point2D::new(50.0, 10.5), Role::Inspector);
        t.add_edge(CoverageTree::BASE, a, 1e6);
        t.add_edge(a, b, 1e6);
        t.covered.insert(a, TargetId(1));
        t.covered.insert(b, TargetId(1));
        assert_eq!(
            validate_tree(&t, &c),
            vec![TreeViolation::DuplicateCoverage(TargetId(1))]
        );
    }

    #[test]
    fn cycle_and_disconnection() {
        let c = cfg(vec![]);
        let mut t = CoverageTree::base_only(c.edge);
        let a = t.add_node(Point2D::new(50.0, 10.0), Role::Relay);
        let b = t.add_node(Point2D::new(55.0, 10.0), Role::Relay);
        let _lonely = t.add_node(Point2D::new(60.0, 10.0), Role::Relay);
        t.add_edge(a, b, 1.0);
        t.add_edge(CoverageTree::BASE, a, 1.0);
        t.add_edge(CoverageTree::BASE, b, 1.0);
        let v = validate_tree(&t, &c);
        // 4 nodes and 3 edges, but one of them closes a cycle
        assert!(v.contains(&TreeViolation::Disconnected(NodeId(3))));
        assert!(!v
            .iter()
            .any(|x| matches!(x, TreeViolation::NotATree { .. })));
    }

    #[test]
    fn merge_shares_base() {
        let c = cfg(vec![(1, 50.0, 10.0), (2, 40.0, 5.0)]);
        let mut a = CoverageTree::base_only(c.edge);
        let i = a.add_node(Point2D::new(50.0, 10.0), Role::Inspector);
        a.add_edge(CoverageTree::BASE, i, 1.0);
        a.covered.insert(i, TargetId(1));
        let mut b = CoverageTree::base_only(c.edge);
        let j = b.add_node(Point2D::new(40.0, 5.0), Role::Inspector);
        b.add_edge(CoverageTree::BASE, j, 1.0);
        b.covered.insert(j, TargetId(2));
        let m = a.merge(&b);
        assert_eq!(m.nodes.len(), 3);
        assert_eq!(m.covered.get(&NodeId(2)), Some(&TargetId(2)));
        assert!(validate_tree(&m, &c).is_empty());
    }
}
