//! Workload builders for the benchmarks.

use std::time::{Duration, Instant};

pub use kdsp_core::instances::gen_dp_no_instance;
use kdsp_core::instances::{gen_random, grid_crossing_instance};
use kdsp_core::layered_dag::disjoint_paths_dag;
use kdsp_core::Instance;

/// Median wall time of `reps` DP runs on `gen_dp_no_instance`.
pub fn time_dp(layers: usize, width: usize, arc_prob: f64, reps: usize) -> Duration {
    let (dag, inst) = gen_dp_no_instance(layers, width, arc_prob, width as u64);
    let mut times: Vec<Duration> = (0..reps)
        .map(|_| {
            let t = Instant::now();
            assert!(disjoint_paths_dag(&dag, &inst).is_none());
            t.elapsed()
        })
        .collect();
    times.sort();
    times[times.len() / 2]
}

pub fn grid_workload(side: usize) -> Instance {
    grid_crossing_instance(side)
}

/// Seeded random instances, `count` of them, with `n` vertices and `k` pairs.
pub fn random_workload(n: usize, p: f64, k: usize, count: u64) -> Vec<Instance> {
    (0..count)
        .map(|s| gen_random(n, p, k, s).expect("generator parameters are valid"))
        .collect()
}
