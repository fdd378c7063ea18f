#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use uav_offload::analyzer::fixture_profile;
use uav_offload::planner::allocate;
use uav_offload::{
    ObjectiveWeights, Plan, Point2D, QualityProfile, ScenarioConfig, Target, TargetId, UavId,
    UavSpec,
};

pub const LABELS: [&str; 6] = ["Maritime", "SaR", "Wildlife", "Tools", "Pets", "Urban"];

/// Uniformly scattered targets over a 500 m square with the edge server at
/// the middle of the bottom side and every UAV parked next to it.
pub fn random_scenario(seed: u64, targets: usize, uavs: usize) -> ScenarioConfig {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let edge = Point2D::new(250.0, 0.0);
    ScenarioConfig {
        area: [500.0, 500.0],
        edge,
        uavs: (0..uavs as u32)
            .map(|i| UavSpec {
                id: UavId(i),
                start: Point2D::new(240.0 + (i % 10) as f64 * 2.0, (i / 10) as f64 * 2.0),
                comm_radius: 16.0,
                sense_radius: 1.0,
                speed: 10.0,
                energy: 1e6,
                move_cost: 10.0,
                hover_cost: 100.0,
            })
            .collect(),
        targets: (0..targets as u32)
            .map(|i| Target {
                id: TargetId(i + 1),
                position: Point2D::new(rng.gen_range(0.0..500.0), rng.gen_range(0.0..500.0)),
                scenario: LABELS[rng.gen_range(0..LABELS.len())].into(),
                task_rate: 24.0,
            })
            .collect(),
        deadline: 0.1,
        channel_error: 0.0,
        link_rate: 1.5e6,
        mission_horizon: 600.0,
        objective_weights: ObjectiveWeights::default(),
    }
}

/// Like [`random_scenario`] but with every target inside `radius` meters of
/// the edge server, so most of them are reachable.
pub fn clustered_scenario(seed: u64, targets: usize, uavs: usize, radius: f64) -> ScenarioConfig {
    let mut cfg = random_scenario(seed, targets, uavs);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    for t in &mut cfg.targets {
        let a = rng.gen_range(0.0..std::f64::consts::PI);
        let d = rng.gen_range(2.0..radius);
        t.position = Point2D::new(250.0 + d * a.cos(), d * a.sin());
    }
    cfg
}

pub fn profile() -> QualityProfile {
    fixture_profile()
}

/// Largest amount by which any edge's reserved load exceeds its capacity.
pub fn worst_overcommit(plan: &Plan, cfg: &ScenarioConfig, p: &QualityProfile) -> f64 {
    let a = allocate(&plan.formation, cfg, p).unwrap();
    assert_eq!(a.compression, plan.compression);
    a.consumed
        .iter()
        .map(|(k, used)| used - a.capacity[k])
        .fold(f64::NEG_INFINITY, f64::max)
}
