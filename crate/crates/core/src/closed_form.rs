//! Exact equilibrium for linear utilities.
//!
//! With linear utilities every active benign agent satisfies
//! `v_i (z - x_i) / z^2 = c`, so `x_i = z - z^2 c / v_i`, and the aggregate
//! `z` follows from summing these conditions (plus the malicious condition
//! when the attacker is active). The participation set is found by a
//! descending search: assume the top `n` agents are active, decide whether the
//! attacker joins by comparing `theta` with the participation threshold of
//! those `n` valuations, and drop the lowest valuation whenever its rate comes
//! out non-positive.

use crate::equilibrium::{EquilibriumResult, SolveMethod};
use crate::error::{ContestError, Result};
use crate::instance::ContestInstance;
use crate::measures::Measures;
use crate::profile::StrategyProfile;

/// Rates at or below this are treated as non-participation during the search.
pub const NEGATIVE_RATE_TOLERANCE: f64 = 1e-14;

fn check_valuations(valuations: &[f64]) -> Result<()> {
    if valuations.is_empty() {
        return Err(ContestError::Usage("need at least one valuation".into()));
    }
    if let Some(v) = valuations.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
        return Err(ContestError::Domain(format!(
            "valuations must be positive, got {v}"
        )));
    }
    Ok(())
}

/// Smallest willingness factor at which the attacker joins a contest whose
/// active benign agents have these valuations:
/// `(n - 1) / (sum(v) * sum(1/v) - n (n - 1))`.
///
/// For a single active agent the attacker joins at any positive `theta`.
pub fn participation_threshold(valuations: &[f64]) -> Result<f64> {
    check_valuations(valuations)?;
    let targeted = vec![true; valuations.len()];
    Ok(targeted_threshold(valuations, &targeted))
}

/// Participation threshold when only `targeted` agents enter the attacker's objective.
/// Infinite when no active agent is targeted.
fn targeted_threshold(valuations: &[f64], targeted: &[bool]) -> f64 {
    let n = valuations.len() as f64;
    let inv_sum: f64 = valuations.iter().map(|v| 1.0 / v).sum();
    let (targeted_sum, targeted_count) = valuations
        .iter()
        .zip(targeted)
        .filter(|(_, &t)| t)
        .fold((0.0, 0.0), |(s, m), (v, _)| (s + v, m + 1.0));
    let denom = targeted_sum * inv_sum - targeted_count * (n - 1.0);
    if denom <= 0.0 {
        f64::INFINITY
    } else {
        (n - 1.0) / denom
    }
}

/// Nash equilibrium of an all-linear instance, honouring its targeting indicators.
pub fn solve_linear_ne(instance: &ContestInstance) -> Result<EquilibriumResult> {
    solve_linear_ne_targeted(instance, instance.targeted())
}

/// Nash equilibrium when the attacker only counts the agents flagged in `targeted`.
///
/// The attacker branch replaces `sum(v)` with the targeted sum and `n` with the
/// targeted count in the aggregate `z = sum_t(v) / (m_t + 1/theta)`.
pub fn solve_linear_ne_targeted(
    instance: &ContestInstance,
    targeted: &[bool],
) -> Result<EquilibriumResult> {
    let instance = instance.with_targeting(targeted.to_vec())?;
    let valuations = instance.valuations().ok_or_else(|| {
        ContestError::Usage("the closed-form solver needs all-linear utilities".into())
    })?;
    let n_total = valuations.len();
    if n_total == 0 {
        return Err(ContestError::Usage("instance has no benign agents".into()));
    }
    let c = instance.cost();
    let theta = instance.theta();
    let attacker_in_play = instance.malicious_in_play();
    // Unit-price game with valuations v / c has the same equilibrium.
    let effective: Vec<f64> = valuations.iter().map(|v| v / c).collect();

    // Prefix sums over the valuation order: sum(1/w), targeted sum(w) and count.
    let mut inv = vec![0.0; n_total + 1];
    let mut tsum = vec![0.0; n_total + 1];
    let mut tcount = vec![0.0; n_total + 1];
    for k in 0..n_total {
        inv[k + 1] = inv[k] + 1.0 / effective[k];
        tsum[k + 1] = tsum[k] + if targeted[k] { effective[k] } else { 0.0 };
        tcount[k + 1] = tcount[k] + if targeted[k] { 1.0 } else { 0.0 };
    }

    let mut n = n_total;
    let mut steps = 0;
    loop {
        steps += 1;
        let nf = n as f64;
        let denom = tsum[n] * inv[n] - tcount[n] * (nf - 1.0);
        let threshold = if denom <= 0.0 {
            f64::INFINITY
        } else {
            (nf - 1.0) / denom
        };
        let attacker_joins = attacker_in_play && theta >= threshold;

        if n == 1 && !attacker_joins {
            let profile = StrategyProfile::degenerate(n_total, 1)?;
            return EquilibriumResult::from_profile(
                &instance,
                profile,
                SolveMethod::ClosedForm,
                steps,
            );
        }

        let z = if attacker_joins {
            tsum[n] / (tcount[n] + 1.0 / theta)
        } else {
            (nf - 1.0) / inv[n]
        };

        // The lowest valuation has the lowest rate.
        let lowest = z - z * z / effective[n - 1];
        if lowest <= NEGATIVE_RATE_TOLERANCE && n > 1 {
            n -= 1;
            continue;
        }
        if lowest <= NEGATIVE_RATE_TOLERANCE {
            return Err(ContestError::Domain(
                "participation search ended with no active benign agent".into(),
            ));
        }

        let mut rates = vec![0.0; n_total + 1];
        for (slot, w) in rates[1..=n].iter_mut().zip(&effective) {
            *slot = z - z * z / w;
        }
        if attacker_joins {
            rates[0] = (z - rates[1..=n].iter().sum::<f64>()).max(0.0);
        }
        let profile = StrategyProfile::new(rates)?;
        return EquilibriumResult::from_profile(&instance, profile, SolveMethod::ClosedForm, steps);
    }
}

/// Measures of `n` identical agents (`v = 1`) when the attacker targets `m`
/// of them and participates (`theta > (n - 1) / m`).
pub fn homogeneous_measures(n: usize, m: usize, theta: f64) -> Result<Measures> {
    if n == 0 || m == 0 || m > n {
        return Err(ContestError::Usage(format!(
            "need 1 <= M <= N, got N={n}, M={m}"
        )));
    }
    if !(theta.is_finite() && theta > (n as f64 - 1.0) / m as f64) {
        return Err(ContestError::Precondition(format!(
            "theta = {theta} does not exceed (N-1)/M = {}; the attacker stays out",
            (n as f64 - 1.0) / m as f64
        )));
    }
    let nf = n as f64;
    let mt = m as f64 * theta;
    let u = 1.0 / (1.0 + mt);
    let v = u * u;
    Ok(Measures {
        su: nf * u,
        sv: nf * v,
        sw: mt * u,
        per_agent_u: vec![u; n],
        per_agent_v: vec![v; n],
        v0: -2.0 * mt * u + nf * mt * v,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::compute_measures;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn thresholds() {
        for n in 1..8 {
            let t = participation_threshold(&vec![1.0; n]).unwrap();
            assert!(close(t, (n as f64 - 1.0) / n as f64, 1e-15));
        }
        assert_eq!(participation_threshold(&[0.3]).unwrap(), 0.0);
        assert!(close(
            participation_threshold(&[1.0, 0.5]).unwrap(),
            0.4,
            1e-15
        ));
        assert!(participation_threshold(&[1.0, 0.0]).is_err());
        assert!(participation_threshold(&[]).is_err());
    }

    #[test]
    fn single_agent_against_attacker() {
        for theta in [0.2, 1.0, 3.0] {
            let r = solve_linear_ne(&ContestInstance::linear(&[1.0], theta).unwrap()).unwrap();
            let d = (1.0 + theta) * (1.0 + theta);
            assert!(close(r.rates()[1], theta / d, 1e-15));
            assert!(close(r.rates()[0], theta * theta / d, 1e-15));
            assert!(r.malicious_active);
        }
    }

    #[test]
    fn two_agents_below_threshold() {
        let r = solve_linear_ne(&ContestInstance::linear(&[1.0, 0.5], 0.1).unwrap()).unwrap();
        assert_eq!(r.rates()[0], 0.0);
        assert!(close(r.rates()[1], 2.0 / 9.0, 1e-15));
        assert!(close(r.rates()[2], 1.0 / 9.0, 1e-15));
        let z = r.profile.total();
        assert!(close(z, 1.0 / 3.0, 1e-15));
        assert!(close((z - r.rates()[1]) / (z * z), 1.0, 1e-12));
    }

    #[test]
    fn homogeneous_with_attacker() {
        for n in 2..10 {
            let theta = (n as f64 - 1.0) / n as f64 + 0.3;
            let r =
                solve_linear_ne(&ContestInstance::linear(&vec![1.0; n], theta).unwrap()).unwrap();
            let nt = n as f64 * theta;
            for i in 1..=n {
                assert!(close(r.rates()[i], nt / ((1.0 + nt) * (1.0 + nt)), 1e-14));
            }
        }
    }

    #[test]
    fn zero_theta_equals_no_attacker() {
        let a = ContestInstance::linear(&[1.0, 0.7, 0.2, 0.05], 0.0).unwrap();
        let r0 = solve_linear_ne(&a).unwrap();
        let r1 = solve_linear_ne(&a.without_malicious()).unwrap();
        assert_eq!(r0.profile, r1.profile);
    }

    #[test]
    fn degenerate_single_agent() {
        let r = solve_linear_ne(&ContestInstance::linear(&[1.0], 0.0).unwrap()).unwrap();
        assert!(r.degenerate);
        assert_eq!(r.profile.shares(), vec![0.0, 1.0]);
    }

    #[test]
    fn low_valuations_drop_out() {
        let r = solve_linear_ne(&ContestInstance::linear(&[1.0, 0.9, 0.01], 0.0).unwrap()).unwrap();
        assert_eq!(r.participating_benign, vec![1, 2]);
        // Inactive agent satisfies v <= z.
        assert!(r.foc_residuals[3] <= 0.0);
    }

    #[test]
    fn partial_targeting_examples() {
        // N=2, v=(1,1), one targeted, theta=2.
        let inst = ContestInstance::linear(&[1.0, 1.0], 2.0).unwrap();
        let r = solve_linear_ne_targeted(&inst, &[true, false]).unwrap();
        for x in r.rates() {
            assert!(close(*x, 2.0 / 9.0, 1e-15));
        }
        // N=20, M=10, theta=2.
        let inst = ContestInstance::linear(&vec![1.0; 20], 2.0).unwrap();
        let mut t = vec![false; 20];
        t[..10].iter_mut().for_each(|x| *x = true);
        let r = solve_linear_ne_targeted(&inst, &t).unwrap();
        for x in r.rates() {
            assert!(close(*x, 20.0 / 441.0, 1e-15));
        }
        let m = compute_measures(&inst.with_targeting(t).unwrap(), &r.profile).unwrap();
        assert!(close(m.su, 20.0 / 21.0, 1e-14));
        assert!(close(m.sw, 20.0 / 21.0, 1e-14));
        assert!(close(m.v0, -440.0 / 441.0, 1e-14));
    }

    #[test]
    fn untargeted_attacker_stays_out() {
        let inst = ContestInstance::linear(&[1.0, 0.6, 0.3], 5.0).unwrap();
        let r = solve_linear_ne_targeted(&inst, &[false; 3]).unwrap();
        let nom = solve_linear_ne(&inst.without_malicious()).unwrap();
        assert_eq!(r.profile, nom.profile);
    }

    #[test]
    fn homogeneous_formulas() {
        let m = homogeneous_measures(2, 2, 1.0).unwrap();
        assert!(close(m.su, 2.0 / 3.0, 1e-15));
        assert!(close(m.sv, 2.0 / 9.0, 1e-15));
        assert!(close(m.sw, 2.0 / 3.0, 1e-15));
        let m = homogeneous_measures(20, 10, 2.0).unwrap();
        assert!(close(m.v0, -440.0 / 441.0, 1e-14));
        let m = homogeneous_measures(20, 20, 1e9).unwrap();
        assert!(m.su < 1e-8);
        assert!(matches!(
            homogeneous_measures(20, 5, 2.0),
            Err(ContestError::Precondition(_))
        ));
    }

    #[test]
    fn closed_form_rejects_log_utilities() {
        let inst = ContestInstance::new(vec![crate::UtilitySpec::logarithmic(1.0, 1.0)], 1.0, 1.0)
            .unwrap();
        assert!(matches!(
            solve_linear_ne(&inst),
            Err(ContestError::Usage(_))
        ));
    }
}
