mod common;

use std::time::{Duration, Instant};

use uav_offload::planner::allocate;
use uav_offload::steiner::{tst, TerminalSet};
use uav_offload::{greedy_a2tpp, Execution, GreedyParams};

use common::*;

fn median(mut v: Vec<Duration>) -> f64 {
    v.sort();
    v[v.len() / 2].as_secs_f64()
}

/// Least-squares slope of log(time) against log(size).
fn loglog_slope(points: &[(f64, f64)]) -> f64 {
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let cov: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    cov / var
}

#[test]
fn greedy_runtime_grows_polynomially() {
    let p = profile();
    let seq = GreedyParams {
        execution: Execution::Sequential,
        ..GreedyParams::default()
    };
    let mut points = Vec::new();
    for n in [10usize, 20, 40] {
        let times = (0..5)
            .map(|seed| {
                let cfg = clustered_scenario(seed, n, n, 110.0);
                let t = Instant::now();
                greedy_a2tpp(&cfg, &p, &seq).unwrap();
                t.elapsed()
            })
            .collect();
        points.push((n as f64, median(times)));
    }
    let slope = loglog_slope(&points);
    println!("greedy log-log slope {slope:.2} over {points:?}");
    assert!(slope <= 6.5);
}

#[test]
fn bandwidth_allocation_runtime_grows_polynomially() {
    let p = profile();
    let mut points = Vec::new();
    for n in [10usize, 20, 40] {
        let cfg = clustered_scenario(7, n, 4 * n, 110.0);
        let tree = tst(
            &TerminalSet {
                base: cfg.edge,
                terminals: cfg.targets.iter().map(|t| (t.id, t.position)).collect(),
                comm_radius: 16.0,
            },
            cfg.link_rate,
        );
        // batches keep microsecond calls above timer noise
        let times = (0..15)
            .map(|_| {
                let t = Instant::now();
                for _ in 0..50 {
                    allocate(&tree, &cfg, &p).unwrap();
                }
                t.elapsed()
            })
            .collect();
        points.push((tree.uav_count() as f64, median(times)));
    }
    let slope = loglog_slope(&points);
    println!("allocation log-log slope {slope:.2} over {points:?}");
    assert!(slope <= 2.5);
}
