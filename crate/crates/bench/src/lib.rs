//! Fixtures shared by the benchmarks.

use contest_core::harness::{generate_linear_instance, generate_log_instance};
use contest_core::ContestInstance;

/// `count` random linear instances with `N = n` at willingness `theta`.
pub fn linear_batch(n: usize, theta: f64, count: u64) -> Vec<ContestInstance> {
    (0..count)
        .map(|s| {
            generate_linear_instance(n, s)
                .with_theta(theta)
                .expect("valid theta")
        })
        .collect()
}

/// `count` random logarithmic instances with `N = n` at willingness `theta`.
pub fn log_batch(n: usize, theta: f64, count: u64) -> Vec<ContestInstance> {
    (0..count)
        .map(|s| {
            generate_log_instance(n, s)
                .with_theta(theta)
                .expect("valid theta")
        })
        .collect()
}
