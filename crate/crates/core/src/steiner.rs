//! Relay-tree construction with bounded edge length.
//!
//! A formation is grown in three steps: a Euclidean MST over the base and
//! the terminals, greedy Fermat-point contraction of adjacent MST edge pairs
//! whenever that lowers the relay count, and subdivision of every remaining
//! edge into hops no longer than the communication radius.

use std::collections::BTreeSet;

use crate::geometry::{distance, Point2D};
use crate::model::TargetId;
use crate::tree::{CoverageTree, NodeId, Role, LENGTH_TOLERANCE};

#[derive(Debug, Clone, PartialEq)]
pub struct TerminalSet {
    pub base: Point2D,
    pub terminals: Vec<(TargetId, Point2D)>,
    pub comm_radius: f64,
}

const COINCIDENT: f64 = 1e-12;

/// Point minimizing the summed distance to `a`, `b` and `c`.
pub fn fermat_point(a: Point2D, b: Point2D, c: Point2D) -> Point2D {
    let (ab, bc, ca) = (distance(a, b), distance(b, c), distance(c, a));
    if ab < COINCIDENT || ca < COINCIDENT {
        return a;
    }
    if bc < COINCIDENT {
        return b;
    }
    // cosine of the interior angle at each vertex
    let cos_at = |p: Point2D, q: Point2D, r: Point2D, pq: f64, pr: f64| {
        ((q.x - p.x) * (r.x - p.x) + (q.y - p.y) * (r.y - p.y)) / (pq * pr)
    };
    let cos_a = cos_at(a, b, c, ab, ca);
    let cos_b = cos_at(b, a, c, ab, bc);
    let cos_c = cos_at(c, a, b, ca, bc);
    if cos_a <= -0.5 {
        return a;
    }
    if cos_b <= -0.5 {
        return b;
    }
    if cos_c <= -0.5 {
        return c;
    }
    let third = std::f64::consts::FRAC_PI_3;
    let wa = bc / (cos_a.clamp(-1.0, 1.0).acos() + third).sin();
    let wb = ca / (cos_b.clamp(-1.0, 1.0).acos() + third).sin();
    let wc = ab / (cos_c.clamp(-1.0, 1.0).acos() + third).sin();
    let w = wa + wb + wc;
    Point2D::new(
        (wa * a.x + wb * b.x + wc * c.x) / w,
        (wa * a.y + wb * b.y + wc * c.y) / w,
    )
}

struct DisjointSet(Vec<usize>);

impl DisjointSet {
    fn new(n: usize) -> Self {
        Self((0..n).collect())
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.0[ra.max(rb)] = ra.min(rb);
        true
    }
}

/// Minimum spanning tree (Kruskal). Equal lengths are ordered by edge index
/// `(i, j)`, `i < j`, so the output is deterministic.
pub fn euclidean_mst(points: &[Point2D]) -> Vec<(usize, usize)> {
    let n = points.len();
    let mut edges = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            edges.push((distance(points[i], points[j]), i, j));
        }
    }
    edges.sort_by(|x, y| x.0.total_cmp(&y.0).then((x.1, x.2).cmp(&(y.1, y.2))));
    let mut ds = DisjointSet::new(n);
    let mut out = Vec::with_capacity(n.saturating_sub(1));
    for (_, i, j) in edges {
        if ds.union(i, j) {
            out.push((i, j));
            if out.len() + 1 == n {
                break;
            }
        }
    }
    out
}

/// Relays needed on a straight link of length `d` with hop limit `r`.
pub fn relay_count(d: f64, r: f64) -> usize {
    let hops = ((d - LENGTH_TOLERANCE) / r).ceil();
    if hops <= 1.0 {
        0
    } else {
        hops as usize - 1
    }
}

/// Equally spaced relay positions splitting `a`-`b` into hops of at most `r`.
pub fn steinerize_edge(a: Point2D, b: Point2D, r: f64) -> Vec<Point2D> {
    let k = relay_count(distance(a, b), r);
    let hops = (k + 1) as f64;
    (1..=k).map(|i| a.lerp(b, i as f64 / hops)).collect()
}

/// Skeleton graph: base, terminals and Steiner points with straight links.
struct Skeleton {
    points: Vec<Point2D>,
    adj: Vec<BTreeSet<usize>>,
}

impl Skeleton {
    fn from_mst(points: Vec<Point2D>) -> Self {
        let mut adj = vec![BTreeSet::new(); points.len()];
        for (i, j) in euclidean_mst(&points) {
            adj[i].insert(j);
            adj[j].insert(i);
        }
        Self { points, adj }
    }

    fn relays(&self, i: usize, j: usize, r: f64) -> usize {
        relay_count(distance(self.points[i], self.points[j]), r)
    }

    /// Best improving contraction at `v`: (saving, a, b, Fermat point).
    fn best_contraction(&self, v: usize, r: f64) -> Option<(usize, usize, usize, Point2D)> {
        let nbrs: Vec<usize> = self.adj[v].iter().copied().collect();
        let mut best: Option<(usize, usize, usize, Point2D)> = None;
        for (x, &a) in nbrs.iter().enumerate() {
            for &b in &nbrs[x + 1..] {
                let (pv, pa, pb) = (self.points[v], self.points[a], self.points[b]);
                let s = fermat_point(pv, pa, pb);
                let before = self.relays(v, a, r) + self.relays(v, b, r);
                let hub = [(v, pv), (a, pa), (b, pb)]
                    .into_iter()
                    .find(|(_, p)| distance(*p, s) < COINCIDENT);
                let after = match hub {
                    // the optimum is an existing vertex: re-hang the other two on it
                    Some((h, ph)) => [(v, pv), (a, pa), (b, pb)]
                        .into_iter()
                        .filter(|(i, _)| *i != h)
                        .map(|(_, p)| relay_count(distance(ph, p), r))
                        .sum(),
                    None => {
                        1 + relay_count(distance(s, pv), r)
                            + relay_count(distance(s, pa), r)
                            + relay_count(distance(s, pb), r)
                    }
                };
                if after < before {
                    let saving = before - after;
                    if best.map_or(true, |(bs, ..)| saving > bs) {
                        best = Some((saving, a, b, s));
                    }
                }
            }
        }
        best
    }

    fn contract(&mut self, v: usize, a: usize, b: usize, s: Point2D) {
        self.adj[v].remove(&a);
        self.adj[v].remove(&b);
        self.adj[a].remove(&v);
        self.adj[b].remove(&v);
        let hub = [v, a, b]
            .into_iter()
            .find(|&i| distance(self.points[i], s) < COINCIDENT);
        let h = match hub {
            Some(h) => h,
            None => {
                self.points.push(s);
                self.adj.push(BTreeSet::new());
                self.points.len() - 1
            }
        };
        for o in [v, a, b] {
            if o != h {
                self.adj[h].insert(o);
                self.adj[o].insert(h);
            }
        }
    }

    fn apply_fermat(&mut self, originals: usize, r: f64) {
        for v in 0..originals {
            while self.adj[v].len() >= 2 {
                match self.best_contraction(v, r) {
                    Some((_, a, b, s)) => self.contract(v, a, b, s),
                    None => break,
                }
            }
        }
    }
}

fn sorted_terminals(ts: &TerminalSet) -> Vec<(TargetId, Point2D)> {
    let mut t = ts.terminals.clone();
    t.sort_by_key(|(id, _)| *id);
    t
}

fn build(ts: &TerminalSet, hubs: &[Point2D], link_rate: f64, fermat: bool) -> CoverageTree {
    let terminals = sorted_terminals(ts);
    let mut points = vec![ts.base];
    points.extend(terminals.iter().map(|(_, p)| *p));
    points.extend_from_slice(hubs);
    let originals = points.len();
    let mut sk = Skeleton::from_mst(points);
    if fermat {
        sk.apply_fermat(originals, ts.comm_radius);
    }

    let mut tree = CoverageTree::base_only(ts.base);
    let mut ids = vec![CoverageTree::BASE];
    for (tid, p) in &terminals {
        let n = tree.add_node(*p, Role::Inspector);
        tree.covered.insert(n, *tid);
        ids.push(n);
    }
    for &p in &sk.points[terminals.len() + 1..] {
        ids.push(tree.add_node(p, Role::Relay));
    }
    let mut links: Vec<(usize, usize)> = Vec::new();
    for (i, nbrs) in sk.adj.iter().enumerate() {
        links.extend(nbrs.iter().filter(|&&j| j > i).map(|&j| (i, j)));
    }
    for (i, j) in links {
        let mut prev: NodeId = ids[i];
        for p in steinerize_edge(sk.points[i], sk.points[j], ts.comm_radius) {
            let relay = tree.add_node(p, Role::Relay);
            tree.add_edge(prev, relay, link_rate);
            prev = relay;
        }
        tree.add_edge(prev, ids[j], link_rate);
    }
    tree
}

/// Triangular Steiner tree over the base and the terminals; every terminal
/// gets an inspector node at its own position and every edge starts with
/// capacity `link_rate`.
pub fn tst(ts: &TerminalSet, link_rate: f64) -> CoverageTree {
    build(ts, &[], link_rate, true)
}

/// MST plus subdivision, without the Fermat step.
pub fn mst_tree(ts: &TerminalSet, link_rate: f64) -> CoverageTree {
    build(ts, &[], link_rate, false)
}

/// `tst` with extra relay positions forced into the skeleton before the
/// Fermat step.
pub fn tst_with_hubs(ts: &TerminalSet, hubs: &[Point2D], link_rate: f64) -> CoverageTree {
    build(ts, hubs, link_rate, true)
}

/// Straight relay chain from the base to a single target.
pub fn los_tree(
    base: Point2D,
    target: (TargetId, Point2D),
    r: f64,
    link_rate: f64,
) -> CoverageTree {
    tst(
        &TerminalSet {
            base,
            terminals: vec![target],
            comm_radius: r,
        },
        link_rate,
    )
}
