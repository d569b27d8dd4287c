//! Seeded random instances.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::instance::ContestInstance;
use crate::utility::UtilitySpec;

/// Seed of the cell `(theta_index, instance_index)` derived from the base seed.
///
/// Splitmix64 finalizer over a mix of the three inputs, so every cell has an
/// independent stream no matter which thread runs it.
pub fn cell_seed(base_seed: u64, theta_index: u64, instance_index: u64) -> u64 {
    let mut h = splitmix(base_seed);
    h = splitmix(h ^ theta_index.wrapping_mul(0xD6E8_FEB8_6659_FD93));
    splitmix(h ^ instance_index.wrapping_mul(0xA076_1D64_78BD_642F))
}

fn splitmix(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Uniform draw on `(0, 1]`.
fn unit_open_closed(rng: &mut ChaCha8Rng) -> f64 {
    1.0 - rng.random::<f64>()
}

/// `v_1 = 1` followed by `N - 1` uniform `(0, 1]` draws, sorted descending.
pub fn linear_valuations(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v = Vec::with_capacity(n);
    if n > 0 {
        v.push(1.0);
    }
    let mut rest: Vec<f64> = (1..n).map(|_| unit_open_closed(&mut rng)).collect();
    rest.sort_by(|a, b| b.total_cmp(a));
    v.extend(rest);
    v
}

/// Random linear instance with `theta = 0` and unit price.
pub fn generate_linear_instance(n: usize, seed: u64) -> ContestInstance {
    ContestInstance::linear(&linear_valuations(n.max(1), seed), 0.0)
        .expect("valuations in (0, 1] always form a valid instance")
}

/// `(a_i, b_i)` pairs, each uniform on `(0, 1]`.
pub fn log_parameters(n: usize, seed: u64) -> Vec<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let a = unit_open_closed(&mut rng);
            (a, unit_open_closed(&mut rng))
        })
        .collect()
}

/// Random logarithmic instance `U_i(d) = a_i ln(1 + b_i d)` with `theta = 0` and unit price.
pub fn generate_log_instance(n: usize, seed: u64) -> ContestInstance {
    let agents = log_parameters(n.max(1), seed)
        .into_iter()
        .map(|(a, b)| UtilitySpec::logarithmic(a, b))
        .collect();
    ContestInstance::new(agents, 0.0, 1.0)
        .expect("parameters in (0, 1] always form a valid instance")
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn deterministic() {
        assert_eq!(
            generate_linear_instance(5, 42),
            generate_linear_instance(5, 42)
        );
        assert_eq!(generate_log_instance(5, 42), generate_log_instance(5, 42));
        assert_ne!(linear_valuations(5, 1), linear_valuations(5, 2));
        assert_eq!(cell_seed(7, 3, 9), cell_seed(7, 3, 9));
    }

    #[test]
    fn single_agent() {
        assert_eq!(linear_valuations(1, 3), vec![1.0]);
        assert_eq!(generate_linear_instance(1, 3).valuations(), Some(vec![1.0]));
    }

    #[test]
    fn linear_shape() {
        for seed in 0..200 {
            let v = linear_valuations(6, seed);
            assert_eq!(v[0], 1.0);
            assert!(v.windows(2).all(|w| w[0] >= w[1]));
            assert!(v.iter().all(|&x| x > 0.0 && x <= 1.0));
        }
    }

    #[test]
    fn uniform_mean() {
        let draws = 100_000;
        let total: f64 = (0..draws)
            .map(|s| linear_valuations(5, s)[1..].iter().sum::<f64>())
            .sum();
        let mean = total / (4.0 * draws as f64);
        assert!((mean - 0.5).abs() < 0.01, "mean {mean}");
    }

    #[test]
    fn log_range_and_collisions() {
        let mut seen = HashSet::new();
        for k in 0..10_000u64 {
            let p = log_parameters(5, cell_seed(11, 0, k));
            assert!(p
                .iter()
                .all(|&(a, b)| a > 0.0 && a <= 1.0 && b > 0.0 && b <= 1.0));
            let key: Vec<u64> = p
                .iter()
                .flat_map(|&(a, b)| [a.to_bits(), b.to_bits()])
                .collect();
            assert!(seen.insert(key), "collision at {k}");
        }
    }

    #[test]
    fn cell_seeds_distinct() {
        let mut seen = HashSet::new();
        for t in 0..61 {
            for i in 0..1000 {
                assert!(seen.insert(cell_seed(2024, t, i)));
            }
        }
    }
}
