mod common;

use uav_offload::exact::{
    exact_a2tpp, feasibility_check, objective_value, CandidateSet, ExactLimits,
};
use uav_offload::{greedy_a2tpp, GreedyParams};

use common::*;

fn small(seed: u64) -> uav_offload::ScenarioConfig {
    let n_t = 1 + (seed % 3) as usize;
    let n_u = 3 + (seed % 4) as usize;
    let mut cfg = clustered_scenario(seed, n_t, n_u, 45.0);
    cfg.link_rate = 4e5 + 2e5 * (seed % 5) as f64;
    cfg
}

#[test]
fn exact_dominates_greedy() {
    let p = profile();
    let mut gaps = Vec::new();
    for seed in 0..20 {
        let cfg = small(seed);
        let greedy = greedy_a2tpp(&cfg, &p, &GreedyParams::default()).unwrap();
        assert!(
            feasibility_check(&greedy, &cfg, &p).is_empty(),
            "{:?}",
            feasibility_check(&greedy, &cfg, &p)
        );
        let g = objective_value(&greedy, &cfg, &p).unwrap();
        let cand = CandidateSet::target_anchored(&cfg).unwrap();
        let sol = exact_a2tpp(&cfg, &p, &cand, &ExactLimits::default()).unwrap();
        assert!(sol.optimal);
        assert!(feasibility_check(&sol.plan, &cfg, &p).is_empty());
        assert!((objective_value(&sol.plan, &cfg, &p).unwrap() - sol.objective).abs() < 1e-6);
        assert!(
            sol.objective >= g - 1e-9,
            "seed {seed}: {} < {g}",
            sol.objective
        );
        gaps.push((sol.objective - g) / sol.objective.abs().max(1e-12));
    }
    let mean = gaps.iter().sum::<f64>() / gaps.len() as f64;
    println!("mean relative gap exact vs greedy: {:.4}%", 100.0 * mean);
}

#[test]
fn more_candidates_never_hurt() {
    let p = profile();
    for seed in 0..6 {
        let cfg = small(seed);
        let anchored = CandidateSet::target_anchored(&cfg).unwrap();
        let grid = CandidateSet::grid(&cfg, 125.0).unwrap();
        let both = anchored.union(&grid, &cfg).unwrap();
        let limits = ExactLimits::default();
        let a = exact_a2tpp(&cfg, &p, &anchored, &limits).unwrap();
        let b = exact_a2tpp(&cfg, &p, &both, &limits).unwrap();
        assert!(a.optimal && b.optimal);
        assert!(b.objective >= a.objective - 1e-9, "seed {seed}");
    }
}

#[test]
fn parallel_and_sequential_agree() {
    let p = profile();
    let cfg = small(5);
    let cand = CandidateSet::target_anchored(&cfg).unwrap();
    let par = exact_a2tpp(&cfg, &p, &cand, &ExactLimits::default()).unwrap();
    let seq = exact_a2tpp(
        &cfg,
        &p,
        &cand,
        &ExactLimits {
            execution: uav_offload::Execution::Sequential,
            ..ExactLimits::default()
        },
    )
    .unwrap();
    assert_eq!(par.plan, seq.plan);
    assert_eq!(par.objective, seq.objective);
}
