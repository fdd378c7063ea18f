mod common;

use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;
use uav_offload::analyzer::{build_profile, LabeledSample, ProfilingSet, SamplePredicate};
use uav_offload::baselines::{stba, stba_plans};
use uav_offload::plan::{validate_plan, CompressionAssignment};
use uav_offload::planner::cost_alpha;
use uav_offload::rng::keyed_uniform;
use uav_offload::steiner::{mst_tree, relay_count, steinerize_edge, tst, TerminalSet};
use uav_offload::{
    energy_feasible, greedy_a2tpp, validate_tree, CoverageTree, GreedyParams, Level, Point2D,
    Quality, QualityProfile, TargetId,
};

use common::*;

fn terminal_set() -> impl Strategy<Value = TerminalSet> {
    (
        (100.0..400.0f64, 0.0..60.0f64),
        prop::collection::vec((0.0..500.0f64, 0.0..500.0f64), 1..7),
    )
        .prop_map(|((bx, by), pts)| TerminalSet {
            base: Point2D::new(bx, by),
            terminals: pts
                .into_iter()
                .enumerate()
                .map(|(i, (x, y))| (TargetId(i as u32 + 1), Point2D::new(x, y)))
                .collect(),
            comm_radius: 16.0,
        })
}

/// A scenario that accepts any tree built over `ts`.
fn roomy_scenario(ts: &TerminalSet) -> uav_offload::ScenarioConfig {
    let mut cfg = random_scenario(0, 0, 400);
    cfg.edge = ts.base;
    for &(id, pos) in &ts.terminals {
        cfg.targets.push(uav_offload::Target {
            id,
            position: pos,
            scenario: "Urban".into(),
            task_rate: 1.0,
        });
    }
    cfg
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn steiner_trees_are_valid_and_no_larger_than_mst(ts in terminal_set()) {
        let cfg = roomy_scenario(&ts);
        let t = tst(&ts, 1.0);
        prop_assert!(validate_tree(&t, &cfg).is_empty(), "{:?}", validate_tree(&t, &cfg));
        let m = mst_tree(&ts, 1.0);
        prop_assert!(validate_tree(&m, &cfg).is_empty());
        prop_assert!(t.uav_count() <= m.uav_count());
        prop_assert_eq!(t.covered.len(), ts.terminals.len());
        prop_assert_eq!(&t, &tst(&ts, 1.0));
    }

    #[test]
    fn relay_chain_length(d in 0.001..2000.0f64, r in 1.0..100.0f64) {
        let expected = ((d / r).ceil() as usize).saturating_sub(1);
        let relays = steinerize_edge(Point2D::new(0.0, 0.0), Point2D::new(d, 0.0), r);
        // exact multiples of r are the only place the closed form and the
        // tolerance-guarded count can disagree
        if ((d / r) - (d / r).round()).abs() > 1e-9 {
            prop_assert_eq!(relays.len(), expected);
        }
        prop_assert_eq!(relays.len(), relay_count(d, r));
        let mut prev = Point2D::new(0.0, 0.0);
        for p in relays.iter().chain(std::iter::once(&Point2D::new(d, 0.0))) {
            prop_assert!(uav_offload::distance(prev, *p) <= r + 1e-9);
            prev = *p;
        }
    }

    #[test]
    fn cost_alpha_in_unit_interval(
        ts in terminal_set(),
        alpha in 0.0..=1.0f64,
        losses in prop::collection::vec(0.0..=1.0f64, 6),
        spare in 0usize..20,
        keep in 0usize..6,
    ) {
        let t_new = tst(&ts, 1.0);
        let mut prev_ts = ts.clone();
        prev_ts.terminals.truncate(keep.min(ts.terminals.len() - 1));
        let t_prev = tst(&prev_ts, 1.0);
        let archived = CoverageTree::base_only(ts.base);
        let mut ca = CompressionAssignment::default();
        for (i, &(id, _)) in ts.terminals.iter().enumerate() {
            ca.losses.insert(id, losses[i]);
        }
        let fleet = t_prev.uav_count() + t_new.uav_count() + spare;
        let c = cost_alpha(&t_new, &t_prev, &archived, &ca, fleet, alpha).unwrap();
        prop_assert!((0.0..=1.0).contains(&c), "{c}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn planners_respect_every_invariant(seed in any::<u64>(), n_t in 4usize..=20, n_u in 4usize..=30, near in any::<bool>()) {
        let cfg = if near {
            clustered_scenario(seed, n_t, n_u, 120.0)
        } else {
            random_scenario(seed, n_t, n_u)
        };
        let p = profile();
        let mut plans = vec![greedy_a2tpp(&cfg, &p, &GreedyParams::default()).unwrap()];
        plans.extend(stba_plans(&cfg, &p).unwrap().into_values());
        for plan in &plans {
            prop_assert!(validate_tree(&plan.formation, &cfg).is_empty());
            prop_assert!(validate_plan(plan, &cfg).is_empty(), "{:?}", validate_plan(plan, &cfg));
            prop_assert!(plan.uav_count() <= cfg.uavs.len());
            for (u, n) in &plan.assignment {
                let spec = cfg.uav(*u).unwrap();
                prop_assert!(energy_feasible(spec, plan.formation.position(*n), cfg.edge, cfg.mission_horizon));
            }
            let covered: BTreeSet<_> = plan.formation.covered.values().collect();
            prop_assert_eq!(covered.len(), plan.formation.covered.len());
            prop_assert!(plan.compression.losses.values().all(|&l| l >= 0.0));
        }
        // the greedy plan's reservations are made against its own budget
        prop_assert!(worst_overcommit(&plans[0], &cfg, &p) <= 1e-9);
    }
}

#[derive(Debug, Clone)]
struct NoisyHook {
    seed: u64,
    skill: f64,
}

impl SamplePredicate for NoisyHook {
    type Sample = u64;
    type Label = u64;

    fn compress(&self, sample: &u64, level: Level) -> Vec<u8> {
        let mut v = vec![level.get(); 1 + (101 - level.get() as usize) * 3];
        v.extend_from_slice(&sample.to_le_bytes());
        v
    }

    fn classify(&self, payload: &[u8]) -> u64 {
        let id = u64::from_le_bytes(payload[payload.len() - 8..].try_into().unwrap());
        let level = payload[0] as u64;
        let p = self.skill * (1.0 - level as f64 / 200.0);
        if keyed_uniform(self.seed, &[id, level]) < p {
            id % 7
        } else {
            99
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn built_profiles_are_bounded_and_interpolated(
        seed in any::<u64>(),
        skill in 0.0..=1.0f64,
        picks in prop::collection::btree_set(1u8..=100, 1..8),
    ) {
        let data = ProfilingSet {
            scenarios: vec!["a".into(), "b".into()],
            samples: (0..40u64)
                .map(|id| LabeledSample {
                    sample: id,
                    label: id % 7,
                    scenario: if id % 2 == 0 { "a".into() } else { "b".into() },
                })
                .collect(),
        };
        let levels: Vec<Level> = picks.iter().map(|&l| Level::new(l as i64).unwrap()).collect();
        let p = build_profile(&data, &NoisyHook { seed, skill }, &levels).unwrap();
        for s in ["a", "b"] {
            for l in Level::all() {
                let q = p.query(s, l).unwrap();
                prop_assert!((0.0..=1.0).contains(&q.accuracy));
                let below = levels.iter().rev().find(|m| **m <= l).copied();
                let above = levels.iter().find(|m| **m >= l).copied();
                let lo = below.or(above).unwrap();
                let hi = above.or(below).unwrap();
                let (a, b) = (p.query(s, lo).unwrap().accuracy, p.query(s, hi).unwrap().accuracy);
                prop_assert!(q.accuracy >= a.min(b) - 1e-12 && q.accuracy <= a.max(b) + 1e-12);
            }
        }
    }
}

#[test]
fn stba_ignores_profiles() {
    let p = profile();
    let flat: BTreeMap<String, Vec<Quality>> = LABELS
        .iter()
        .map(|s| {
            (
                s.to_string(),
                vec![
                    Quality {
                        accuracy: 0.5,
                        size: 10.0
                    };
                    100
                ],
            )
        })
        .collect();
    let q = QualityProfile::from_tables(flat).unwrap();
    for seed in 0..30 {
        let cfg = clustered_scenario(seed, 8, 12, 100.0);
        let a = stba_plans(&cfg, &p).unwrap();
        let b = stba_plans(&cfg, &q).unwrap();
        for (v, plan) in &a {
            assert_eq!(plan.formation, b[v].formation);
            assert_eq!(plan.formation, stba(&cfg));
        }
    }
}

#[test]
fn energy_monotone_in_budget_and_horizon() {
    let cfg = random_scenario(3, 0, 1);
    let u = &cfg.uavs[0];
    for i in 0..200 {
        let pos = Point2D::new(2.5 * i as f64, 1.5 * i as f64);
        let mut prev = false;
        for k in 0..50 {
            let mut v = u.clone();
            v.energy = k as f64 * 2e4;
            let ok = energy_feasible(&v, pos, cfg.edge, 100.0);
            assert!(ok || !prev);
            prev = ok;
        }
        let mut prev = true;
        for h in 0..50 {
            let ok = energy_feasible(u, pos, cfg.edge, h as f64 * 50.0);
            assert!(!ok || prev);
            prev = ok;
        }
    }
}
