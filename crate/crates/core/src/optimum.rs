//! Social-optimum reference values computed without the malicious agent.

use serde::{Deserialize, Serialize};

use crate::error::{ContestError, Result};
use crate::instance::ContestInstance;
use crate::utility::{Utility, UtilitySpec};

const LAMBDA_TOLERANCE: f64 = 1e-12;

/// Best achievable benign outcome.
///
/// `sv_max` equals `su_max`: holding the optimal shares fixed and sending all
/// rates to zero drives the total cost to zero, so the supremum of net utility
/// is the maximum utility. `sw_max` is only defined for linear instances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimumReport {
    pub su_max: f64,
    pub sv_max: f64,
    /// Always true: `sv_max` is a supremum, approached but not attained.
    pub sv_max_is_supremum: bool,
    pub sw_max: Option<f64>,
    pub optimal_shares: Vec<f64>,
    /// Common marginal utility of active agents at the optimum.
    pub marginal: f64,
}

/// Maximizes `sum U_i(d_i)` over the simplex.
///
/// Linear agents only: the top valuation takes everything (lowest index on
/// ties). Otherwise water-filling: find `lambda` such that the shares
/// `d_i(lambda) = (U_i')^{-1}(lambda)`, clamped at zero, sum to one. A linear
/// agent demands nothing above its valuation and absorbs any remainder at it.
pub fn social_optimum_utility(instance: &ContestInstance) -> Result<OptimumReport> {
    let specs = instance.benign();
    if specs.iter().all(UtilitySpec::is_null) {
        return Err(ContestError::Domain("all utilities are zero".into()));
    }
    let n = specs.len();

    let top_linear = specs
        .iter()
        .enumerate()
        .filter_map(|(i, s)| s.valuation().map(|v| (i, v)))
        .fold(None, |best: Option<(usize, f64)>, (i, v)| match best {
            Some((_, bv)) if bv >= v => best,
            _ => Some((i, v)),
        });

    let nonlinear_demand = |lambda: f64| -> f64 {
        specs
            .iter()
            .filter_map(|s| s.share_at_marginal(lambda))
            .sum()
    };

    let (lambda, mut shares) = if specs.iter().all(UtilitySpec::is_linear) {
        let (winner, v) = top_linear.expect("non-empty linear instance");
        let mut d = vec![0.0; n];
        d[winner] = 1.0;
        (v, d)
    } else {
        // Bisection on the non-increasing aggregate demand of the concave agents.
        let mut lo = specs
            .iter()
            .filter(|s| !s.is_linear())
            .map(|s| s.derivative_unchecked(1.0))
            .fold(f64::INFINITY, f64::min);
        let mut hi = specs
            .iter()
            .map(|s| s.derivative_unchecked(0.0))
            .fold(0.0, f64::max);
        lo = lo.min(hi);
        while hi - lo > LAMBDA_TOLERANCE * hi.max(1.0) {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if nonlinear_demand(mid) > 1.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let lambda_nl = 0.5 * (lo + hi);
        match top_linear {
            Some((winner, v)) if v > lambda_nl => {
                let mut d: Vec<f64> = specs
                    .iter()
                    .map(|s| s.share_at_marginal(v).unwrap_or(0.0))
                    .collect();
                let used: f64 = d.iter().sum();
                d[winner] = (1.0 - used).max(0.0);
                (v, d)
            }
            _ => {
                let d: Vec<f64> = specs
                    .iter()
                    .map(|s| s.share_at_marginal(lambda_nl).unwrap_or(0.0))
                    .collect();
                (lambda_nl, d)
            }
        }
    };

    // Absorb bisection residue so the shares lie exactly on the simplex.
    let sum: f64 = shares.iter().sum();
    if sum > 0.0 {
        shares.iter_mut().for_each(|d| *d /= sum);
    }
    let su_max = specs
        .iter()
        .zip(&shares)
        .map(|(s, &d)| s.value_unchecked(d))
        .sum();
    let sw_max = if instance.is_all_linear() {
        Some(max_osn_revenue(n).0)
    } else {
        None
    };
    Ok(OptimumReport {
        su_max,
        sv_max: su_max,
        sv_max_is_supremum: true,
        sw_max,
        optimal_shares: shares,
        marginal: lambda,
    })
}

/// Supremum of total benign net utility; equals the maximum total utility.
pub fn social_optimum_net_utility(instance: &ContestInstance) -> Result<f64> {
    Ok(social_optimum_utility(instance)?.sv_max)
}

/// Largest platform revenue over all normalized linear valuation vectors
/// without the attacker: `(N - 1) / N`, reached when every `v_i = 1`.
///
/// The flag is true for `N <= 1`, where there is no two-player equilibrium
/// and the value is 0.
pub fn max_osn_revenue(n: usize) -> (f64, bool) {
    if n <= 1 {
        (0.0, true)
    } else {
        ((n as f64 - 1.0) / n as f64, false)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_optimum_goes_to_top_valuation() {
        let inst = ContestInstance::linear(&[0.3, 0.9, 0.9], 0.5).unwrap();
        let r = social_optimum_utility(&inst).unwrap();
        assert_eq!(r.su_max, 1.0);
        assert_eq!(r.optimal_shares, vec![1.0, 0.0, 0.0]);
        assert_eq!(r.sv_max, 1.0);
        assert_eq!(r.sw_max, Some(2.0 / 3.0));
    }

    #[test]
    fn single_agent() {
        let inst =
            ContestInstance::new(vec![UtilitySpec::logarithmic(0.4, 0.3)], 1.0, 1.0).unwrap();
        let r = social_optimum_utility(&inst).unwrap();
        assert!((r.optimal_shares[0] - 1.0).abs() < 1e-12);
        assert!(r.sw_max.is_none());
    }

    #[test]
    fn symmetric_log_pair_splits_evenly() {
        let u = UtilitySpec::logarithmic(1.0, 1.0);
        let inst = ContestInstance::new(vec![u, u], 1.0, 1.0).unwrap();
        let r = social_optimum_utility(&inst).unwrap();
        assert!((r.optimal_shares[0] - 0.5).abs() < 1e-9);
        // Grid oracle over d_1 with 10^6 points.
        let grid = 1_000_000;
        let best = (0..=grid)
            .map(|k| {
                let d = k as f64 / grid as f64;
                u.value_unchecked(d) + u.value_unchecked(1.0 - d)
            })
            .fold(f64::NEG_INFINITY, f64::max);
        assert!((r.su_max - best).abs() < 1e-12);
        assert!((r.su_max - 2.0 * 1.5f64.ln()).abs() < 1e-12);
        assert_eq!(social_optimum_net_utility(&inst).unwrap(), r.su_max);
    }

    #[test]
    fn water_filling_kkt() {
        let specs = vec![
            UtilitySpec::logarithmic(0.9, 0.8),
            UtilitySpec::logarithmic(0.2, 0.1),
            UtilitySpec::logarithmic(0.5, 0.95),
            UtilitySpec::logarithmic(0.05, 0.3),
        ];
        let inst = ContestInstance::new(specs.clone(), 1.0, 1.0).unwrap();
        let r = social_optimum_utility(&inst).unwrap();
        assert!((r.optimal_shares.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        for (s, &d) in specs.iter().zip(&r.optimal_shares) {
            let m = s.derivative_unchecked(d);
            if d > 0.0 {
                assert!(
                    (m - r.marginal).abs() < 1e-9,
                    "active marginal {m} vs {}",
                    r.marginal
                );
            } else {
                assert!(s.derivative_unchecked(0.0) <= r.marginal + 1e-9);
            }
        }
    }

    #[test]
    fn mixed_linear_and_log() {
        let specs = vec![UtilitySpec::linear(0.3), UtilitySpec::logarithmic(1.0, 1.0)];
        let inst = ContestInstance::new(specs, 1.0, 1.0).unwrap();
        let r = social_optimum_utility(&inst).unwrap();
        // Log agent fills until its marginal drops to 0.3: d = 1/0.3 - 1 > 1, so it takes all.
        assert!((r.optimal_shares[1] - 1.0).abs() < 1e-12);
        let specs = vec![UtilitySpec::linear(0.8), UtilitySpec::logarithmic(1.0, 1.0)];
        let inst = ContestInstance::new(specs, 1.0, 1.0).unwrap();
        let r = social_optimum_utility(&inst).unwrap();
        assert!((r.optimal_shares[1] - 0.25).abs() < 1e-12);
        assert!((r.optimal_shares[0] - 0.75).abs() < 1e-12);
    }

    #[test]
    fn revenue_maximum() {
        assert_eq!(max_osn_revenue(2), (0.5, false));
        assert_eq!(max_osn_revenue(5), (0.8, false));
        assert_eq!(max_osn_revenue(1), (0.0, true));
        assert!((1.0 - max_osn_revenue(1_000_000).0) < 1e-5);
    }
}
