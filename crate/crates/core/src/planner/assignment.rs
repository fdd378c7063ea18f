//! Which UAV flies to which formation node.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::geometry::distance;
use crate::model::{energy_feasible, ScenarioConfig, UavId};
use crate::tree::{CoverageTree, NodeId};

/// Minimum-cost assignment of every row to a distinct column
/// (`rows <= cols`), by the Hungarian method with potentials. Returns the
/// column chosen for each row.
pub fn hungarian(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    if n == 0 {
        return Vec::new();
    }
    let m = cost[0].len();
    assert!(n <= m, "more rows than columns");
    // 1-based arrays; index 0 is the virtual start
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; m + 1];
    let mut owner = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    for i in 1..=n {
        owner[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=m {
                if !used[j] {
                    let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut out = vec![0; n];
    for j in 1..=m {
        if owner[j] != 0 {
            out[owner[j] - 1] = j - 1;
        }
    }
    out
}

/// Matches UAVs to the non-base nodes of `formation`, minimizing total
/// distance flown among energy-feasible pairs.
pub fn uav_assignment(
    formation: &CoverageTree,
    cfg: &ScenarioConfig,
) -> Result<BTreeMap<UavId, NodeId>> {
    let nodes: Vec<NodeId> = formation.nodes.iter().skip(1).map(|n| n.id).collect();
    if nodes.is_empty() {
        return Ok(BTreeMap::new());
    }
    if nodes.len() > cfg.uavs.len() {
        return Err(Error::NoFeasibleAssignment);
    }
    let mut feasible_total = 0.0;
    let mut cost: Vec<Vec<f64>> = Vec::with_capacity(nodes.len());
    let mut ok: Vec<Vec<bool>> = Vec::with_capacity(nodes.len());
    for &n in &nodes {
        let pos = formation.position(n);
        let (row, ok_row): (Vec<f64>, Vec<bool>) = cfg
            .uavs
            .iter()
            .map(|u| {
                let feasible = energy_feasible(u, pos, cfg.edge, cfg.mission_horizon);
                (distance(u.start, pos), feasible)
            })
            .unzip();
        feasible_total += row
            .iter()
            .zip(&ok_row)
            .filter(|(_, f)| **f)
            .map(|(c, _)| c)
            .sum::<f64>();
        cost.push(row);
        ok.push(ok_row);
    }
    // any assignment using an infeasible pair costs more than every
    // all-feasible one
    let forbidden = 1.0 + 2.0 * feasible_total;
    for (row, ok_row) in cost.iter_mut().zip(&ok) {
        for (c, f) in row.iter_mut().zip(ok_row) {
            if !f {
                *c = forbidden;
            }
        }
    }
    let cols = hungarian(&cost);
    let mut out = BTreeMap::new();
    for (r, &c) in cols.iter().enumerate() {
        if !ok[r][c] {
            return Err(Error::NoFeasibleAssignment);
        }
        out.insert(cfg.uavs[c].id, nodes[r]);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point2D;
    use crate::model::{ObjectiveWeights, UavSpec};
    use crate::tree::Role;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn brute(cost: &[Vec<f64>]) -> f64 {
        fn go(cost: &[Vec<f64>], r: usize, used: &mut Vec<bool>) -> f64 {
            if r == cost.len() {
                return 0.0;
            }
            let mut best = f64::INFINITY;
            for c in 0..used.len() {
                if !used[c] {
                    used[c] = true;
                    best = best.min(cost[r][c] + go(cost, r + 1, used));
                    used[c] = false;
                }
            }
            best
        }
        go(cost, 0, &mut vec![false; cost[0].len()])
    }

    #[test]
    fn hungarian_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let n = rng.gen_range(1..=5);
            let m = rng.gen_range(n..=6);
            let cost: Vec<Vec<f64>> = (0..n)
                .map(|_| (0..m).map(|_| rng.gen_range(0.0..100.0)).collect())
                .collect();
            let cols = hungarian(&cost);
            let mut seen = cols.clone();
            seen.sort();
            seen.dedup();
            assert_eq!(seen.len(), n);
            let total: f64 = cols.iter().enumerate().map(|(r, &c)| cost[r][c]).sum();
            assert!((total - brute(&cost)).abs() < 1e-9);
        }
    }

    fn cfg(starts: &[(f64, f64, f64)]) -> ScenarioConfig {
        ScenarioConfig {
            area: [100.0, 100.0],
            edge: Point2D::new(50.0, 0.0),
            uavs: starts
                .iter()
                .enumerate()
                .map(|(i, &(x, y, energy))| UavSpec {
                    id: UavId(i as u32),
                    start: Point2D::new(x, y),
                    comm_radius: 16.0,
                    sense_radius: 1.0,
                    speed: 5.0,
                    energy,
                    move_cost: 1.0,
                    hover_cost: 0.0,
                })
                .collect(),
            targets: vec![],
            deadline: 0.1,
            channel_error: 0.0,
            link_rate: 1e6,
            mission_horizon: 10.0,
            objective_weights: ObjectiveWeights::default(),
        }
    }

    fn formation(points: &[(f64, f64)]) -> CoverageTree {
        let mut t = CoverageTree::base_only(Point2D::new(50.0, 0.0));
        let mut prev = CoverageTree::BASE;
        for &(x, y) in points {
            let n = t.add_node(Point2D::new(x, y), Role::Relay);
            t.add_edge(prev, n, 1.0);
            prev = n;
        }
        t
    }

    #[test]
    fn nearer_uav_chosen() {
        let c = cfg(&[(0.0, 0.0, 1e6), (50.0, 5.0, 1e6)]);
        let a = uav_assignment(&formation(&[(50.0, 10.0)]), &c).unwrap();
        assert_eq!(a, [(UavId(1), NodeId(1))].into_iter().collect());
    }

    #[test]
    fn crossing_avoided() {
        let c = cfg(&[(40.0, 0.0, 1e6), (60.0, 0.0, 1e6)]);
        let a = uav_assignment(&formation(&[(60.0, 10.0), (40.0, 10.0)]), &c).unwrap();
        assert_eq!(a[&UavId(0)], NodeId(2));
        assert_eq!(a[&UavId(1)], NodeId(1));
    }

    #[test]
    fn weak_uav_excluded() {
        let c = cfg(&[(50.0, 9.0, 1.0), (0.0, 0.0, 1e6), (100.0, 0.0, 1e6)]);
        let a = uav_assignment(&formation(&[(50.0, 10.0), (50.0, 20.0)]), &c).unwrap();
        assert!(!a.contains_key(&UavId(0)));
        assert_eq!(a.len(), 2);

        let c = cfg(&[(50.0, 9.0, 1.0), (0.0, 0.0, 1e6)]);
        assert!(matches!(
            uav_assignment(&formation(&[(50.0, 10.0), (50.0, 20.0)]), &c),
            Err(Error::NoFeasibleAssignment)
        ));
    }
}
